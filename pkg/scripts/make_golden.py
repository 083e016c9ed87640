#!/usr/bin/env python3
"""Regenerate the golden replay artifacts.

Runs the bundled loading-spinner session against the scripted fake model
in record mode (deterministic ids), freezes the resulting project
document as the golden, and sanity-checks that a network-free replay
reproduces it byte for byte.

Usage: python3 scripts/make_golden.py
"""

from __future__ import annotations

import os
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from animstudio.correction import ScheduleAnalyzer  # noqa: E402
from animstudio.gateway import GatewayClient, GatewayConfig  # noqa: E402
from animstudio.service import Engine  # noqa: E402
from animstudio.session import load_session, run_session  # noqa: E402
import fakemodel  # noqa: E402

SESSION = REPO / "tests" / "data" / "sessions" / "loading_spinner.json"
FIXTURES = REPO / "tests" / "data" / "fixtures"
GOLDEN = REPO / "tests" / "data" / "golden" / "loading_spinner.json"

# Unmet item used by the recorded correction round; UI tests run their
# replay server with the matching mock-analyzer schedule.
CORRECTION_UNMET = "the ring should pulse while spinning"


def record() -> bytes:
    if FIXTURES.exists():
        shutil.rmtree(FIXTURES)
    FIXTURES.mkdir(parents=True)
    os.environ.setdefault("LLM_API_KEY", "golden-recording-key")
    config = GatewayConfig(mode="record", fixtures_dir=str(FIXTURES))
    client = GatewayClient(config, transport=fakemodel.transport())
    with tempfile.TemporaryDirectory() as tmp:
        engine = Engine(tmp, client, deterministic=True)
        project_id = run_session(engine, load_session(SESSION))
        return engine.entry(project_id).path.read_bytes()


def record_correction_flow() -> None:
    """Records the incremental generation a correction round triggers, so a
    replay server with a mock analyzer can grow correction chains."""
    config = GatewayConfig(mode="record", fixtures_dir=str(FIXTURES))
    client = GatewayClient(config, transport=fakemodel.transport())
    with tempfile.TemporaryDirectory() as tmp:
        video = Path(tmp) / "clip.mp4"
        video.write_bytes(b"\x00")
        engine = Engine(
            Path(tmp) / "data",
            client,
            deterministic=True,
            video_provider=lambda node: str(video),
            analyzer=ScheduleAnalyzer.parse(f"unsat:{CORRECTION_UNMET}|sat"),
        )
        entry = engine.create_project()
        project_id = entry.store.project_id
        root = list(entry.store.trees.values())[0].root_id
        outcome = engine.generate(
            project_id,
            root,
            "a loading spinner: a ring that spins with a soft blue leading edge",
            "full",
        )
        run = engine.correct(project_id, outcome["node_id"], max_rounds=2)
        assert run["terminal"] == "satisfied", run
        assert len(run["rounds"]) == 2, run


def replay() -> bytes:
    config = GatewayConfig(mode="replay", fixtures_dir=str(FIXTURES))
    with tempfile.TemporaryDirectory() as tmp:
        engine = Engine(tmp, GatewayClient(config))
        project_id = run_session(engine, load_session(SESSION))
        return engine.entry(project_id).path.read_bytes()


def main() -> int:
    recorded = record()
    record_correction_flow()
    GOLDEN.parent.mkdir(parents=True, exist_ok=True)
    GOLDEN.write_bytes(recorded)
    replayed = replay()
    if replayed != recorded:
        print("FAIL: replay does not reproduce the recorded document", file=sys.stderr)
        return 2
    again = replay()
    if again != replayed:
        print("FAIL: two replays differ", file=sys.stderr)
        return 2
    print(f"golden written: {GOLDEN} ({len(recorded)} bytes)")
    print(f"fixtures: {len(list(FIXTURES.glob('*.json')))} files in {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
