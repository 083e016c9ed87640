import { capturePreview } from "../capture.js";
import { buildPreviewDocument } from "../preview.js";
import type { WorkspaceStore } from "../store.js";

/** Live sandboxed preview of the active node, plus the record-and-correct
 * trigger. Render errors inside the frame surface as an overlay and never
 * crash the workspace. */
export class ShowPanel {
  readonly el: HTMLElement;
  private badge: HTMLElement;
  private frame: HTMLIFrameElement;
  private overlay: HTMLElement;
  private renderedDoc = "";

  constructor(
    root: HTMLElement,
    private store: WorkspaceStore,
  ) {
    this.el = root;
    this.el.classList.add("panel");
    this.el.dataset.panel = "show";
    this.el.innerHTML = `
      <header>
        <span class="title">Show</span>
        <span class="badge" data-node-id=""></span>
        <span class="spacer"></span>
        <label class="capture-seconds">sec <input type="number" value="3" min="1" max="30"></label>
        <button data-action="capture" class="primary" title="Record the preview and run video correction">
          Record &amp; correct
        </button>
      </header>
      <div class="preview-host">
        <iframe class="preview" sandbox="allow-scripts"></iframe>
        <div class="preview-overlay" hidden></div>
      </div>
    `;
    this.badge = this.el.querySelector(".badge")!;
    this.frame = this.el.querySelector("iframe.preview")!;
    this.overlay = this.el.querySelector(".preview-overlay")!;
    this.el.querySelector('[data-action="capture"]')!.addEventListener("click", () => {
      void this.captureAndCorrect();
    });
    window.addEventListener("message", (event) => {
      if (event?.data?.type === "preview-error") {
        this.overlay.hidden = false;
        this.overlay.textContent = `preview error: ${event.data.message}`;
      }
    });
    store.subscribe(() => this.render());
  }

  private async captureAndCorrect(): Promise<void> {
    const seconds = Number(this.el.querySelector<HTMLInputElement>(".capture-seconds input")!.value) || 3;
    const video = await capturePreview(this.frame, { durationSeconds: seconds });
    await this.store.captureAndCorrect(video);
  }

  private render(): void {
    const node = this.store.activeNode();
    this.badge.textContent = node ? node.id.slice(0, 8) : "";
    this.badge.dataset.nodeId = node?.id ?? "";
    const doc = buildPreviewDocument(node?.bundle ?? null);
    if (doc === this.renderedDoc) return;
    this.renderedDoc = doc;
    this.overlay.hidden = true;
    this.overlay.textContent = "";
    this.frame.srcdoc = doc;
  }
}
