import { ApiClient } from "./api.js";
import { LayoutManager, applyLayout } from "./layout.js";
import { CodePanel } from "./panels/code.js";
import { ChatPanel } from "./panels/chat.js";
import { ShowPanel } from "./panels/show.js";
import { TreePanel } from "./panels/tree.js";
import { WorkspaceStore } from "./store.js";
import type { PanelId } from "./layout.js";

export interface Workspace {
  store: WorkspaceStore;
  panels: { code: CodePanel; tree: TreePanel; show: ShowPanel; chat: ChatPanel };
  container: HTMLElement;
}

/** Builds the four-panel workspace inside `root`. Exported separately from the
 * boot code so tests can assemble a workspace against any server. */
export function createWorkspace(
  root: HTMLElement,
  baseUrl: string,
  options: { miniatures?: boolean } = {},
): Workspace {
  const api = new ApiClient(baseUrl);
  const store = new WorkspaceStore(api);

  const container = document.createElement("div");
  container.className = "workspace";
  root.appendChild(container);

  const host = (id: PanelId): HTMLElement => {
    const el = document.createElement("div");
    container.appendChild(el);
    el.dataset.panel = id;
    return el;
  };

  const panels = {
    code: new CodePanel(host("code"), store),
    tree: new TreePanel(host("tree"), store, options),
    show: new ShowPanel(host("show"), store),
    chat: new ChatPanel(host("chat"), store),
  };

  // Panel headers swap position via drag-and-drop; the arrangement persists.
  const layoutManager = new LayoutManager(localStorage, "animstudio-layout");
  let layout = layoutManager.load();
  applyLayout(container, layout);
  container.querySelectorAll<HTMLElement>("[data-panel] > header").forEach((header) => {
    const panelId = (header.parentElement as HTMLElement).dataset.panel as PanelId;
    header.draggable = true;
    header.addEventListener("dragstart", (event) => {
      event.dataTransfer?.setData("text/panel-id", panelId);
    });
    header.addEventListener("dragover", (event) => event.preventDefault());
    header.addEventListener("drop", (event) => {
      event.preventDefault();
      const source = event.dataTransfer?.getData("text/panel-id") as PanelId;
      if (!source || source === panelId) return;
      layout = layoutManager.swap(layout, source, panelId);
      layoutManager.save(layout);
      applyLayout(container, layout);
    });
  });

  return { store, panels, container };
}

async function boot(): Promise<void> {
  const root = document.querySelector<HTMLElement>("#app");
  if (!root) throw new Error("missing #app element");
  const params = new URLSearchParams(location.search);
  const baseUrl = params.get("api") ?? `${location.protocol}//${location.host}`;
  const workspace = createWorkspace(root, baseUrl);
  const projectId = params.get("project");
  if (projectId) {
    await workspace.store.openProject(projectId);
  } else {
    await workspace.store.createProject();
    const url = new URL(location.href);
    url.searchParams.set("project", workspace.store.state.projectId!);
    history.replaceState(null, "", url);
  }
  void workspace.store.startEventLoop();
}

if (typeof document !== "undefined" && document.querySelector("#app")) {
  void boot();
}
