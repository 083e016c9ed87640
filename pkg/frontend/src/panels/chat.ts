import type { WorkspaceStore } from "../store.js";
import type { ParameterResource } from "../types.js";

/** Conversation, diff view, and the learn-by-play parameter widgets. */
export class ChatPanel {
  readonly el: HTMLElement;
  private badge: HTMLElement;
  private messages: HTMLElement;
  private diffView: HTMLElement;
  private paramsHost: HTMLElement;
  private renderedChatLength = -1;
  private renderedParamsKey = "";
  private renderedDiffLabel: string | null = null;

  constructor(
    root: HTMLElement,
    private store: WorkspaceStore,
  ) {
    this.el = root;
    this.el.classList.add("panel");
    this.el.dataset.panel = "chat";
    this.el.innerHTML = `
      <header>
        <span class="title">Chat</span>
        <span class="badge" data-node-id=""></span>
      </header>
      <div class="chat-messages"></div>
      <div class="diff-view" hidden>
        <div class="diff-title"></div>
        <ul class="diff-changes"></ul>
      </div>
      <div class="chat-params">
        <div class="params-head">
          <span>parameters</span>
          <input class="params-focus" placeholder="focus, e.g. 'duration'">
          <button data-action="load-params">load</button>
        </div>
        <div class="params-list"></div>
      </div>
      <form class="chat-input">
        <textarea rows="2" placeholder="describe the animation or the change"></textarea>
        <div class="chat-buttons">
          <button type="button" data-action="optimize">Optimize</button>
          <button type="submit" data-mode="incremental">Generate (incremental)</button>
          <button type="submit" data-mode="full" class="primary">Generate</button>
        </div>
      </form>
    `;
    this.badge = this.el.querySelector(".badge")!;
    this.messages = this.el.querySelector(".chat-messages")!;
    this.diffView = this.el.querySelector(".diff-view")!;
    this.paramsHost = this.el.querySelector(".params-list")!;

    const form = this.el.querySelector<HTMLFormElement>(".chat-input")!;
    const textarea = form.querySelector("textarea")!;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const submitter = (event as SubmitEvent).submitter as HTMLButtonElement | null;
      const mode = (submitter?.dataset.mode ?? "full") as "full" | "incremental";
      const prompt = textarea.value.trim();
      if (!prompt) return;
      textarea.value = "";
      void this.store.generate(prompt, mode);
    });
    form.querySelector('[data-action="optimize"]')!.addEventListener("click", () => {
      const draft = textarea.value.trim();
      if (!draft) return;
      void this.store.optimizePrompt(draft).then((improved) => {
        if (improved) textarea.value = improved;
      });
    });
    this.el.querySelector('[data-action="load-params"]')!.addEventListener("click", () => {
      const focus = this.el.querySelector<HTMLInputElement>(".params-focus")!.value.trim();
      void this.store.loadParameters(focus || undefined);
    });
    store.subscribe(() => this.render());
  }

  private widgetFor(parameter: ParameterResource): HTMLElement {
    const row = document.createElement("div");
    row.className = "param-row";
    row.dataset.parameterId = parameter.id;
    const label = document.createElement("label");
    label.textContent = `${parameter.location.selector} ${parameter.location.property}`;
    row.appendChild(label);

    let input: HTMLInputElement | HTMLSelectElement;
    const numeric = parameter.bounds !== null;
    if (numeric) {
      const slider = document.createElement("input");
      slider.type = "range";
      const [low, high, step] = parameter.bounds!;
      slider.min = String(low);
      slider.max = String(high);
      slider.step = String(step || 1);
      slider.value = String(parseFloat(parameter.currentValue));
      input = slider;
    } else if (parameter.valueKind === "enum" || parameter.valueKind === "timing-function") {
      const select = document.createElement("select");
      const options = parameter.options.length
        ? parameter.options
        : ["linear", "ease", "ease-in", "ease-out", "ease-in-out"];
      for (const option of options) {
        const el = document.createElement("option");
        el.value = option;
        el.textContent = option;
        el.selected = option === parameter.currentValue;
        select.appendChild(el);
      }
      input = select;
    } else if (parameter.valueKind === "color") {
      const color = document.createElement("input");
      color.type = "color";
      if (/^#[0-9a-fA-F]{6}$/.test(parameter.currentValue)) color.value = parameter.currentValue;
      input = color;
    } else {
      const text = document.createElement("input");
      text.type = "text";
      text.value = parameter.currentValue;
      input = text;
    }
    input.dataset.kind = parameter.valueKind;
    const value = document.createElement("span");
    value.className = "param-value";
    value.textContent = parameter.currentValue;
    input.addEventListener("change", () => {
      const raw = input.value;
      const next = numeric ? `${raw}${parameter.unit}` : raw;
      value.textContent = next;
      void this.store.applyParameter(parameter.id, next);
    });
    row.appendChild(input);
    row.appendChild(value);
    return row;
  }

  private render(): void {
    const state = this.store.state;
    this.badge.textContent = state.activeNodeId ? state.activeNodeId.slice(0, 8) : "";
    this.badge.dataset.nodeId = state.activeNodeId ?? "";

    if (state.chat.length !== this.renderedChatLength) {
      this.renderedChatLength = state.chat.length;
      this.messages.innerHTML = "";
      for (const entry of state.chat) {
        const div = document.createElement("div");
        div.className = `chat-entry role-${entry.role}`;
        div.textContent = entry.text;
        this.messages.appendChild(div);
      }
      this.messages.scrollTop = this.messages.scrollHeight;
    }

    if (state.diffLabel !== this.renderedDiffLabel) {
      this.renderedDiffLabel = state.diffLabel;
      if (state.diff) {
        this.diffView.hidden = false;
        this.diffView.querySelector(".diff-title")!.textContent = `diff ${state.diffLabel}`;
        const list = this.diffView.querySelector(".diff-changes")!;
        list.innerHTML = "";
        for (const change of state.diff.styleChanges) {
          const li = document.createElement("li");
          li.className = `diff-change op-${change.op}`;
          li.textContent =
            change.op === "changed"
              ? `${change.selector} { ${change.property}: ${change.before} -> ${change.after} }`
              : `${change.op} ${change.selector} { ${change.property} }`;
          list.appendChild(li);
        }
        for (const change of state.diff.markupChanges) {
          const li = document.createElement("li");
          li.className = `diff-change op-${change.op}`;
          li.textContent = `${change.op} ${change.path} ${change.detail}`;
          list.appendChild(li);
        }
        for (const change of state.diff.scriptChanges) {
          const li = document.createElement("li");
          li.className = `diff-change op-${change.op}`;
          li.textContent = `${change.op} script lines ${change.lineRange.from[0] + 1}-${change.lineRange.from[1]}`;
          list.appendChild(li);
        }
      } else {
        this.diffView.hidden = true;
      }
    }

    const paramsKey = state.parameters.map((p) => p.id).join(",");
    if (paramsKey !== this.renderedParamsKey) {
      this.renderedParamsKey = paramsKey;
      this.paramsHost.innerHTML = "";
      for (const parameter of state.parameters) {
        this.paramsHost.appendChild(this.widgetFor(parameter));
      }
    }
  }
}
