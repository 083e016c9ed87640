#!/usr/bin/env python3
"""Run the bundled loading-spinner session network-free and print the result:
the version tree, the final code, and the semantic diff of the incremental
round. A quick way to see the whole engine move.

Usage: python3 scripts/demo_replay.py
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from animstudio.diffing import diff_bundles, render_diff_text  # noqa: E402
from animstudio.gateway import GatewayClient, GatewayConfig  # noqa: E402
from animstudio.service import Engine  # noqa: E402
from animstudio.session import load_session, run_session  # noqa: E402

FIXTURES = REPO / "tests" / "data" / "fixtures"
SESSION = REPO / "tests" / "data" / "sessions" / "loading_spinner.json"


def main() -> int:
    config = GatewayConfig(mode="replay", fixtures_dir=str(FIXTURES))
    with tempfile.TemporaryDirectory() as tmp:
        engine = Engine(tmp, GatewayClient(config))
        project_id = run_session(engine, load_session(SESSION))
        entry = engine.entry(project_id)
        tree = entry.store.trees["index.html"]

        print(f"project {project_id}: {len(tree.nodes)} nodes\n")
        ordered = sorted(tree.nodes.values(), key=lambda n: n.created_at)
        for node in ordered:
            marker = "*" if node.id == tree.active_id else " "
            prompt = node.prompt[:64] or "(root)"
            print(f" {marker} [{node.kind:12}] {node.id[:8]}  {prompt}")

        full_node, incremental_node = ordered[1], ordered[2]
        print("\nSemantic diff, full generation -> incremental refinement:")
        print(render_diff_text(diff_bundles(full_node.bundle, incremental_node.bundle)))

        final = tree.nodes[tree.active_id]
        print("\nFinal bundle:")
        for part in ("template", "style", "script"):
            text = final.bundle.part(part)
            if text.strip():
                print(f"--- {part} ---\n{text}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
