import { beforeEach, describe, expect, test } from "vitest";

import { createWorkspace, type Workspace } from "../src/main.js";
import { BASE_URL, CORRECTION_UNMET, FULL_PROMPT } from "./config.js";

function badges(workspace: Workspace): string[] {
  return ["code", "tree", "show", "chat"].map(
    (panel) =>
      workspace.container.querySelector<HTMLElement>(`[data-panel="${panel}"] .badge`)!.dataset
        .nodeId ?? "",
  );
}

async function spinnerWorkspace(): Promise<Workspace> {
  const workspace = createWorkspace(document.body, BASE_URL, { miniatures: false });
  await workspace.store.createProject();
  const generated = await workspace.store.generate(FULL_PROMPT, "full");
  expect(generated).not.toBeNull();
  return workspace;
}

beforeEach(() => {
  document.body.innerHTML = "";
  localStorage.clear();
});

describe("four-panel workspace against the replay server", () => {
  test("clicking a tree node synchronizes every panel to that node id", async () => {
    const workspace = await spinnerWorkspace();
    const rootId = workspace.store.state.tree!.root_id;
    expect(workspace.store.state.activeNodeId).not.toBe(rootId);

    const rootCard = workspace.container.querySelector<HTMLElement>(
      `.tree-card[data-node-id="${rootId}"]`,
    )!;
    rootCard.click();
    await new Promise((resolve) => setTimeout(resolve, 300));

    expect(workspace.store.state.activeNodeId).toBe(rootId);
    const ids = badges(workspace);
    expect(new Set(ids).size).toBe(1);
    expect(ids[0]).toBe(rootId);
  });

  test("code submit creates a visible manual-edit node", async () => {
    const workspace = await spinnerWorkspace();
    const before = Object.keys(workspace.store.state.tree!.nodes).length;

    const styleBox = workspace.container.querySelector<HTMLTextAreaElement>(
      '[data-panel="code"] textarea[data-part="style"]',
    )!;
    styleBox.value = ".spinner { width: 64px; }";
    workspace.container
      .querySelector<HTMLButtonElement>('[data-panel="code"] [data-action="submit"]')!
      .click();
    await new Promise((resolve) => setTimeout(resolve, 400));

    const tree = workspace.store.state.tree!;
    expect(Object.keys(tree.nodes)).toHaveLength(before + 1);
    const manualCard = workspace.container.querySelector<HTMLElement>(
      '.tree-card[data-kind="manual-edit"]:not([data-node-id=""])',
    );
    const manualCards = workspace.container.querySelectorAll('.tree-card[data-kind="manual-edit"]');
    // root is manual-edit too; the submit added a second manual card
    expect(manualCards.length).toBeGreaterThanOrEqual(2);
    expect(manualCard).not.toBeNull();
    expect(workspace.store.activeNode()!.kind).toBe("manual-edit");
    expect(workspace.store.activeNode()!.bundle.style).toContain("width: 64px");
  });

  test("a parameter slider change produces exactly one style change in the diff view", async () => {
    const workspace = await spinnerWorkspace();
    await workspace.store.loadParameters();

    const row = Array.from(
      workspace.container.querySelectorAll<HTMLElement>('[data-panel="chat"] .param-row'),
    ).find((candidate) => candidate.querySelector("label")!.textContent!.includes("animation-duration"));
    expect(row).toBeDefined();
    const slider = row!.querySelector<HTMLInputElement>('input[type="range"]')!;
    slider.value = "2.5";
    slider.dispatchEvent(new Event("change", { bubbles: true }));
    await new Promise((resolve) => setTimeout(resolve, 500));

    const diff = workspace.store.state.diff!;
    expect(diff).not.toBeNull();
    expect(diff.styleChanges).toHaveLength(1);
    expect(diff.styleChanges[0].property).toBe("animation-duration");
    const rows = workspace.container.querySelectorAll('[data-panel="chat"] .diff-change');
    expect(rows).toHaveLength(1);
    expect(workspace.store.activeNode()!.kind).toBe("manual-edit");
  });

  test("correction trigger with the mock analyzer grows a visible correction chain", async () => {
    const workspace = await spinnerWorkspace();
    const before = Object.keys(workspace.store.state.tree!.nodes).length;
    const startId = workspace.store.state.activeNodeId!;

    const stub = new Blob(["capture-stub"], { type: "video/mp4" });
    const run = await workspace.store.captureAndCorrect(stub, 2);

    expect(run).not.toBeNull();
    expect(run!.terminal).toBe("satisfied");
    expect(run!.rounds).toHaveLength(2);
    expect(run!.rounds[0].follow_up_prompt).toContain(CORRECTION_UNMET);

    const tree = workspace.store.state.tree!;
    expect(Object.keys(tree.nodes)).toHaveLength(before + 1);
    const correctionCard = workspace.container.querySelector<HTMLElement>(
      '.tree-card[data-kind="correction"]',
    );
    expect(correctionCard).not.toBeNull();
    const correctionId = run!.rounds[0].result_node_id!;
    expect(tree.nodes[correctionId].parent_id).toBe(startId);
    const chat = workspace.store.state.chat.map((entry) => entry.text).join("\n");
    expect(chat).toContain("correction finished: satisfied");
  });

  test("diff menu sends the rendered diff into the chat", async () => {
    const workspace = await spinnerWorkspace();
    const fullId = workspace.store.state.activeNodeId!;
    await workspace.store.submitCode({ style: ".spinner { width: 72px; }" });
    const manualId = workspace.store.state.activeNodeId!;

    await workspace.store.loadDiff(fullId, manualId);
    workspace.store.summarizeDiffToChat();

    const chatText = workspace.store.state.chat.map((entry) => entry.text).join("\n");
    expect(chatText).toContain("diff");
    expect(chatText).toContain("style:");
    const entries = workspace.container.querySelectorAll('[data-panel="chat"] .chat-entry');
    expect(entries.length).toBeGreaterThan(0);
  });
});
