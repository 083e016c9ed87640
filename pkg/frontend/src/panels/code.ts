import type { WorkspaceStore } from "../store.js";
import type { PartName } from "../types.js";

const PARTS: PartName[] = ["template", "style", "script"];

/** Three code boxes (template / style / script) with submit, AI Fix and a
 * line-anchored AI Explain on the current selection. */
export class CodePanel {
  readonly el: HTMLElement;
  private badge: HTMLElement;
  private editors = new Map<PartName, HTMLTextAreaElement>();
  private renderedNodeId: string | null = null;

  constructor(
    root: HTMLElement,
    private store: WorkspaceStore,
  ) {
    this.el = root;
    this.el.classList.add("panel");
    this.el.dataset.panel = "code";
    this.el.innerHTML = `
      <header>
        <span class="title">Code</span>
        <span class="badge" data-node-id=""></span>
        <span class="spacer"></span>
        <button data-action="explain" title="Explain the selected lines">AI Explain</button>
        <button data-action="fix" title="Ask the model to repair the code">AI Fix</button>
        <button data-action="submit" class="primary">Submit code</button>
      </header>
      <div class="editors"></div>
    `;
    this.badge = this.el.querySelector(".badge")!;
    const editorsHost = this.el.querySelector<HTMLElement>(".editors")!;
    for (const part of PARTS) {
      const section = document.createElement("section");
      section.innerHTML = `<label>${part}</label>`;
      const textarea = document.createElement("textarea");
      textarea.dataset.part = part;
      textarea.spellcheck = false;
      section.appendChild(textarea);
      editorsHost.appendChild(section);
      this.editors.set(part, textarea);
    }
    this.el.querySelector('[data-action="submit"]')!.addEventListener("click", () => {
      void this.submit();
    });
    this.el.querySelector('[data-action="fix"]')!.addEventListener("click", () => {
      void this.store.fix("");
    });
    this.el.querySelector('[data-action="explain"]')!.addEventListener("click", () => {
      void this.explainSelection();
    });
    store.subscribe(() => this.render());
  }

  private async submit(): Promise<void> {
    const parts: Partial<Record<PartName, string>> = {};
    for (const [part, editor] of this.editors) parts[part] = editor.value;
    await this.store.submitCode(parts);
  }

  /** Maps the focused textarea's selection to 1-based line numbers. */
  private async explainSelection(): Promise<void> {
    for (const [part, editor] of this.editors) {
      const { selectionStart, selectionEnd } = editor;
      if (document.activeElement !== editor || selectionStart === selectionEnd) continue;
      const before = editor.value.slice(0, selectionStart);
      const fromLine = before.split("\n").length;
      const selected = editor.value.slice(selectionStart, selectionEnd);
      const toLine = fromLine + selected.split("\n").length - 1;
      await this.store.explainSelection(part, fromLine, toLine);
      return;
    }
    this.store.pushChat("system", "select some lines in a code box first");
  }

  private render(): void {
    const node = this.store.activeNode();
    this.badge.textContent = node ? node.id.slice(0, 8) : "";
    this.badge.dataset.nodeId = node?.id ?? "";
    // Only overwrite editor contents on a node switch, never mid-typing.
    if (!node || node.id === this.renderedNodeId) return;
    this.renderedNodeId = node.id;
    for (const [part, editor] of this.editors) {
      editor.value = node.bundle[part];
    }
  }
}
