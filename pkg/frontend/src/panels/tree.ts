import { buildPreviewDocument } from "../preview.js";
import type { WorkspaceStore } from "../store.js";
import type { NodeResource, TreeResource } from "../types.js";

/** Version tree rendered as draggable node cards, one per interaction round.
 * Clicking a card activates the node everywhere; the card menu exposes the
 * per-node operations (append prompt, optimize, duplicate, diff, delete). */
export class TreePanel {
  readonly el: HTMLElement;
  private badge: HTMLElement;
  private cards: HTMLElement;
  private renderedSignature = "";
  private diffAnchor: string | null = null;
  private miniaturesEnabled: boolean;

  constructor(
    root: HTMLElement,
    private store: WorkspaceStore,
    options: { miniatures?: boolean } = {},
  ) {
    this.miniaturesEnabled = options.miniatures ?? true;
    this.el = root;
    this.el.classList.add("panel");
    this.el.dataset.panel = "tree";
    this.el.innerHTML = `
      <header>
        <span class="title">Versions</span>
        <span class="badge" data-node-id=""></span>
      </header>
      <div class="tree-cards"></div>
    `;
    this.badge = this.el.querySelector(".badge")!;
    this.cards = this.el.querySelector(".tree-cards")!;
    store.subscribe(() => this.render());
  }

  private childrenOf(tree: TreeResource, nodeId: string): NodeResource[] {
    return Object.values(tree.nodes)
      .filter((node) => node.parent_id === nodeId)
      .sort((a, b) => a.created_at.localeCompare(b.created_at));
  }

  private card(node: NodeResource, depth: number, activeId: string): HTMLElement {
    const card = document.createElement("div");
    card.className = `tree-card kind-${node.kind}${node.id === activeId ? " active" : ""}`;
    card.dataset.nodeId = node.id;
    card.dataset.kind = node.kind;
    card.style.marginLeft = `${depth * 18}px`;
    card.draggable = true;
    const label = node.prompt ? node.prompt.slice(0, 60) : "(root)";
    card.innerHTML = `
      <div class="card-head">
        <span class="kind">${node.kind}</span>
        <span class="node-id">${node.id.slice(0, 8)}</span>
      </div>
      <div class="card-label"></div>
      <div class="card-actions">
        <button data-menu="prompt" title="Append a prompt from this node">+prompt</button>
        <button data-menu="optimize" title="AI-optimize a draft prompt">optimize</button>
        <button data-menu="duplicate">duplicate</button>
        <button data-menu="diff">diff</button>
        <button data-menu="delete">delete</button>
      </div>
    `;
    card.querySelector(".card-label")!.textContent = label;
    if (this.miniaturesEnabled) {
      const mini = document.createElement("iframe");
      mini.className = "mini-preview";
      mini.setAttribute("sandbox", "allow-scripts");
      mini.setAttribute("loading", "lazy");
      mini.srcdoc = buildPreviewDocument(node.bundle);
      card.insertBefore(mini, card.querySelector(".card-actions"));
    }
    card.addEventListener("click", (event) => {
      if ((event.target as HTMLElement).closest("button")) return;
      void this.store.activate(node.id);
    });
    card.addEventListener("dragstart", (event) => {
      event.dataTransfer?.setData("text/node-id", node.id);
    });
    card.querySelectorAll<HTMLButtonElement>("[data-menu]").forEach((button) => {
      button.addEventListener("click", () => void this.menuAction(button.dataset.menu!, node));
    });
    return card;
  }

  private async menuAction(action: string, node: NodeResource): Promise<void> {
    switch (action) {
      case "prompt": {
        const prompt = window.prompt(`New prompt from ${node.id.slice(0, 8)}:`);
        if (prompt) {
          const mode = node.bundle.style.trim() || node.bundle.template.trim() ? "incremental" : "full";
          await this.store.generate(prompt, mode, node.id);
        }
        break;
      }
      case "optimize": {
        const draft = window.prompt("Draft prompt to optimize:");
        if (draft) await this.store.optimizePrompt(draft);
        break;
      }
      case "duplicate":
        await this.store.duplicate(node.id);
        break;
      case "diff": {
        if (this.diffAnchor && this.diffAnchor !== node.id) {
          await this.store.loadDiff(this.diffAnchor, node.id);
          this.store.summarizeDiffToChat();
          this.diffAnchor = null;
        } else {
          this.diffAnchor = node.id;
          this.store.pushChat("system", `diff: pick a second node (first is ${node.id.slice(0, 8)})`);
        }
        break;
      }
      case "delete":
        await this.store.deleteNode(node.id);
        break;
    }
  }

  private render(): void {
    const { tree, activeNodeId } = this.store.state;
    this.badge.textContent = activeNodeId ? activeNodeId.slice(0, 8) : "";
    this.badge.dataset.nodeId = activeNodeId ?? "";
    if (!tree) return;
    const signature =
      Object.keys(tree.nodes).sort().join(",") + "|" + tree.active_id;
    if (signature === this.renderedSignature) return;
    this.renderedSignature = signature;
    this.cards.innerHTML = "";
    const walk = (nodeId: string, depth: number) => {
      const node = tree.nodes[nodeId];
      if (!node) return;
      this.cards.appendChild(this.card(node, depth, tree.active_id));
      for (const child of this.childrenOf(tree, nodeId)) walk(child.id, depth + 1);
    };
    walk(tree.root_id, 0);
  }
}
