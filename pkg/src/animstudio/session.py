"""Scripted sessions: a JSON file describing a sequence of engine operations.

Used by the `replay` CLI command (network-free, deterministic against
fixtures) and by `fixtures record` (same steps against a live endpoint,
capturing fixtures along the way).
"""

from __future__ import annotations

import json
from pathlib import Path

from .service import Engine


class SessionError(Exception):
    pass


def _resolve_node(engine: Engine, project_id: str, ref: str, last_node: str | None) -> str:
    entry = engine.entry(project_id)
    trees = list(entry.store.trees.values())
    if ref == "$root":
        return trees[0].root_id
    if ref == "$active":
        return trees[0].active_id
    if ref == "$last":
        if last_node is None:
            raise SessionError("$last used before any node-producing step")
        return last_node
    return ref


def run_session(engine: Engine, session: dict) -> str:
    """Executes the steps, returns the project id."""
    filename = session.get("filename", "index.html")
    entry = engine.create_project(filename=filename)
    project_id = entry.store.project_id
    last_node: str | None = None

    for index, step in enumerate(session.get("steps", [])):
        op = step.get("op")
        node_ref = step.get("node", "$active")
        node_id = _resolve_node(engine, project_id, node_ref, last_node)
        if op == "generate":
            outcome = engine.generate(
                project_id, node_id, step["prompt"], step.get("mode", "full")
            )
            last_node = outcome["node_id"]
        elif op == "fix":
            outcome = engine.fix(project_id, node_id, step.get("error_report", ""))
            last_node = outcome["node_id"]
        elif op == "manual_edit":
            last_node = engine.manual_edit(project_id, node_id, step.get("parts", {}))
        elif op == "param":
            last_node = engine.apply_param(project_id, node_id, step["param_id"], step["value"])
        elif op == "duplicate":
            last_node = engine.duplicate(project_id, node_id)
        elif op == "delete":
            engine.delete(project_id, node_id)
        elif op == "set_active":
            engine.activate(project_id, node_id)
        else:
            raise SessionError(f"step {index}: unknown op {op!r}")
    return project_id


def load_session(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or "steps" not in data:
        raise SessionError(f"{path}: not a session file (expected an object with 'steps')")
    return data
