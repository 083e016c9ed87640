import { ApiClient } from "./api.js";
import type {
  CorrectionRunResource,
  DiffResource,
  NodeResource,
  ParameterResource,
  PartName,
  TreeResource,
} from "./types.js";

export interface ChatEntry {
  role: "user" | "assistant" | "system";
  text: string;
}

export interface WorkspaceState {
  projectId: string | null;
  filename: string;
  tree: TreeResource | null;
  activeNodeId: string | null;
  sequence: number;
  chat: ChatEntry[];
  parameters: ParameterResource[];
  diff: DiffResource | null;
  diffLabel: string;
  busy: boolean;
  error: string | null;
}

type Listener = (state: WorkspaceState) => void;

/** Client-side mirror of one project. Every mutation round-trips through the
 * service; panels subscribe and re-render from the same snapshot, which is
 * what keeps all four in sync on a single node id. */
export class WorkspaceStore {
  state: WorkspaceState = {
    projectId: null,
    filename: "index.html",
    tree: null,
    activeNodeId: null,
    sequence: 0,
    chat: [],
    parameters: [],
    diff: null,
    diffLabel: "",
    busy: false,
    error: null,
  };

  private listeners = new Set<Listener>();
  private polling = false;

  constructor(readonly api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private patch(partial: Partial<WorkspaceState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  activeNode(): NodeResource | null {
    const { tree, activeNodeId } = this.state;
    if (!tree || !activeNodeId) return null;
    return tree.nodes[activeNodeId] ?? null;
  }

  node(nodeId: string): NodeResource | null {
    return this.state.tree?.nodes[nodeId] ?? null;
  }

  // -- lifecycle -----------------------------------------------------------

  async createProject(filename = "index.html"): Promise<void> {
    const project = await this.api.createProject(filename);
    this.patch({ projectId: project.project_id, filename });
    await this.refresh();
  }

  async openProject(projectId: string): Promise<void> {
    const project = await this.api.getProject(projectId);
    const filename = Object.keys(project.trees)[0];
    this.patch({ projectId: project.project_id, filename });
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const { projectId, filename } = this.state;
    if (!projectId) return;
    const tree = await this.api.getTree(projectId, filename);
    this.patch({ tree, activeNodeId: tree.active_id, sequence: tree.sequence });
  }

  /** Long-poll the change feed; any committed mutation triggers a refresh so
   * stale panels can never survive an external edit. */
  async startEventLoop(): Promise<void> {
    if (this.polling) return;
    this.polling = true;
    while (this.polling && this.state.projectId) {
      try {
        const event = await this.api.events(this.state.projectId, this.state.sequence, 25);
        if (event.sequence > this.state.sequence) await this.refresh();
      } catch {
        await new Promise((resolve) => setTimeout(resolve, 1000));
      }
    }
  }

  stopEventLoop(): void {
    this.polling = false;
  }

  private async run<T>(label: string, action: () => Promise<T>): Promise<T | null> {
    this.patch({ busy: true, error: null });
    try {
      return await action();
    } catch (error) {
      this.patch({ error: `${label}: ${(error as Error).message}` });
      return null;
    } finally {
      this.patch({ busy: false });
    }
  }

  // -- node operations -------------------------------------------------------

  async activate(nodeId: string): Promise<void> {
    await this.run("activate", async () => {
      await this.api.setActive(this.state.projectId!, nodeId);
      await this.refresh();
    });
  }

  async submitCode(parts: Partial<Record<PartName, string>>): Promise<NodeResource | null> {
    return this.run("submit code", async () => {
      const node = await this.api.submitBundle(
        this.state.projectId!,
        this.state.activeNodeId!,
        parts,
        this.state.sequence,
      );
      await this.refresh();
      return node;
    });
  }

  async generate(prompt: string, mode: "full" | "incremental", fromNodeId?: string): Promise<NodeResource | null> {
    return this.run("generate", async () => {
      const base = fromNodeId ?? this.state.activeNodeId!;
      this.pushChat("user", prompt);
      const node = await this.api.generate(this.state.projectId!, base, prompt, mode);
      this.pushChat("assistant", node.response_summary || "(new revision)");
      if (node.lazy_findings?.length) {
        this.pushChat("system", `lazy output detected: ${node.lazy_findings.length} finding(s)`);
      }
      await this.refresh();
      return node;
    });
  }

  async fix(errorReport: string): Promise<NodeResource | null> {
    return this.run("AI fix", async () => {
      const node = await this.api.fix(this.state.projectId!, this.state.activeNodeId!, errorReport);
      this.pushChat("assistant", `fix applied: ${node.response_summary}`);
      await this.refresh();
      return node;
    });
  }

  async duplicate(nodeId: string): Promise<void> {
    await this.run("duplicate", async () => {
      await this.api.duplicate(this.state.projectId!, nodeId);
      await this.refresh();
    });
  }

  async deleteNode(nodeId: string): Promise<void> {
    await this.run("delete", async () => {
      await this.api.deleteNode(this.state.projectId!, nodeId);
      await this.refresh();
    });
  }

  // -- chat / diff / parameters ------------------------------------------------

  pushChat(role: ChatEntry["role"], text: string): void {
    this.patch({ chat: [...this.state.chat, { role, text }] });
  }

  async loadDiff(fromId: string, toId: string): Promise<DiffResource | null> {
    return this.run("diff", async () => {
      const diff = await this.api.diff(this.state.projectId!, fromId, toId);
      this.patch({
        diff,
        diffLabel: `${fromId.slice(0, 8)} -> ${toId.slice(0, 8)}`,
      });
      return diff;
    });
  }

  /** Sends the machine-readable diff text into the chat for follow-up
   * questions. */
  summarizeDiffToChat(): void {
    if (!this.state.diff) return;
    this.pushChat("system", `diff ${this.state.diffLabel}:\n${this.state.diff.rendered}`);
  }

  async loadParameters(focus?: string): Promise<void> {
    await this.run("parameters", async () => {
      const parameters = await this.api.parameters(
        this.state.projectId!,
        this.state.activeNodeId!,
        focus,
      );
      this.patch({ parameters });
    });
  }

  /** Applies a parameter value; the service records a manual-edit node and the
   * diff view is pointed at parent -> new node so the change is visible. */
  async applyParameter(parameterId: string, value: string): Promise<NodeResource | null> {
    return this.run("apply parameter", async () => {
      const base = this.state.activeNodeId!;
      const node = await this.api.applyParameter(this.state.projectId!, base, parameterId, value);
      await this.refresh();
      await this.loadDiff(base, node.id);
      await this.loadParameters();
      return node;
    });
  }

  async explainSelection(part: PartName, fromLine: number, toLine: number): Promise<void> {
    await this.run("explain", async () => {
      this.pushChat("user", `explain ${part} lines ${fromLine}-${toLine}`);
      const { explanation } = await this.api.explain(
        this.state.projectId!,
        this.state.activeNodeId!,
        part,
        fromLine,
        toLine,
      );
      this.pushChat("assistant", explanation);
    });
  }

  async optimizePrompt(draft: string): Promise<string | null> {
    return this.run("optimize", async () => {
      const { prompt } = await this.api.optimize(
        this.state.projectId!,
        this.state.activeNodeId!,
        draft,
      );
      this.pushChat("system", `optimized prompt:\n${prompt}`);
      return prompt;
    });
  }

  // -- correction ---------------------------------------------------------------

  async captureAndCorrect(video: Blob, maxRounds?: number): Promise<CorrectionRunResource | null> {
    return this.run("correction", async () => {
      const base = this.state.activeNodeId!;
      await this.api.uploadVideo(this.state.projectId!, base, video);
      const run = await this.api.correct(this.state.projectId!, base, maxRounds);
      this.pushChat(
        "system",
        `correction finished: ${run.terminal} after ${run.rounds.length} round(s)`,
      );
      await this.refresh();
      return run;
    });
  }
}
