export type PanelId = "code" | "tree" | "show" | "chat";

export interface PanelLayout {
  /** Grid order of the four panels, all always reachable. */
  order: PanelId[];
  /** Fractional column/row sizes of the 2x2 grid. */
  columns: [number, number];
  rows: [number, number];
}

export const DEFAULT_LAYOUT: PanelLayout = {
  order: ["code", "tree", "show", "chat"],
  columns: [0.5, 0.5],
  rows: [0.5, 0.5],
};

const ALL_PANELS: PanelId[] = ["code", "tree", "show", "chat"];

function isValid(layout: PanelLayout): boolean {
  return (
    Array.isArray(layout.order) &&
    layout.order.length === 4 &&
    ALL_PANELS.every((panel) => layout.order.includes(panel)) &&
    layout.columns?.length === 2 &&
    layout.rows?.length === 2
  );
}

/** Persists the panel arrangement per project; restore round-trips. */
export class LayoutManager {
  constructor(
    private storage: Pick<Storage, "getItem" | "setItem">,
    private key: string,
  ) {}

  load(): PanelLayout {
    const raw = this.storage.getItem(this.key);
    if (!raw) return structuredClone(DEFAULT_LAYOUT);
    try {
      const parsed = JSON.parse(raw) as PanelLayout;
      return isValid(parsed) ? parsed : structuredClone(DEFAULT_LAYOUT);
    } catch {
      return structuredClone(DEFAULT_LAYOUT);
    }
  }

  save(layout: PanelLayout): void {
    if (!isValid(layout)) throw new Error("refusing to save a layout missing panels");
    this.storage.setItem(this.key, JSON.stringify(layout));
  }

  swap(layout: PanelLayout, a: PanelId, b: PanelId): PanelLayout {
    const order = [...layout.order];
    const ia = order.indexOf(a);
    const ib = order.indexOf(b);
    [order[ia], order[ib]] = [order[ib], order[ia]];
    return { ...layout, order };
  }
}

/** Applies the layout to the workspace grid container. */
export function applyLayout(container: HTMLElement, layout: PanelLayout): void {
  container.style.gridTemplateColumns = layout.columns.map((c) => `${c}fr`).join(" ");
  container.style.gridTemplateRows = layout.rows.map((r) => `${r}fr`).join(" ");
  layout.order.forEach((panelId, index) => {
    const panel = container.querySelector<HTMLElement>(`[data-panel="${panelId}"]`);
    if (panel) panel.style.order = String(index);
  });
}
