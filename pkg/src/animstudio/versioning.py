"""Tree-structured, non-linear version management.

Every node is one input-output round (AI-generated, manual edit or a
correction-loop round) holding a complete bundle snapshot, so any node
can be previewed or diffed on its own. Chat context for a node is
assembled strictly from its ancestor chain: sibling branches never leak
into each other's conversations.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from .generation import ContextMessage
from .model import CodeBundle
from .repair import EMPTY_REPORT, RepairReport

NODE_KINDS = ("ai-generated", "manual-edit", "correction")

MANUAL_EDIT_NOTE = "[code manually edited]"


class UnknownNode(KeyError):
    def __init__(self, node_id: str):
        super().__init__(node_id)
        self.node_id = node_id

    def __str__(self) -> str:
        return f"unknown node: {self.node_id}"


class CannotDeleteRoot(ValueError):
    pass


class CannotDuplicateRoot(ValueError):
    pass


def mint_id() -> str:
    return str(uuid.uuid4())


def mint_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class VersionNode:
    id: str
    parent_id: str | None
    kind: str
    prompt: str
    response_summary: str
    bundle: CodeBundle
    repair: RepairReport = EMPTY_REPORT
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "parent_id": self.parent_id,
            "kind": self.kind,
            "prompt": self.prompt,
            "response_summary": self.response_summary,
            "bundle": self.bundle.to_dict(),
            "repair": self.repair.to_dict(),
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> VersionNode:
        return cls(
            id=data["id"],
            parent_id=data.get("parent_id"),
            kind=data["kind"],
            prompt=data.get("prompt", ""),
            response_summary=data.get("response_summary", ""),
            bundle=CodeBundle.from_dict(data["bundle"]),
            repair=RepairReport.from_dict(data.get("repair", {})),
            created_at=data.get("created_at", ""),
        )


@dataclass
class VersionTree:
    nodes: dict[str, VersionNode]
    root_id: str
    active_id: str

    def node(self, node_id: str) -> VersionNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def children_of(self, node_id: str) -> list[VersionNode]:
        return [n for n in self.nodes.values() if n.parent_id == node_id]

    def to_dict(self) -> dict:
        return {
            "root_id": self.root_id,
            "active_id": self.active_id,
            "nodes": {nid: n.to_dict() for nid, n in self.nodes.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> VersionTree:
        return cls(
            nodes={nid: VersionNode.from_dict(n) for nid, n in data["nodes"].items()},
            root_id=data["root_id"],
            active_id=data["active_id"],
        )


def new_tree(
    bundle: CodeBundle,
    *,
    kind: str = "manual-edit",
    prompt: str = "",
    node_id: str | None = None,
    created_at: str | None = None,
) -> VersionTree:
    root = VersionNode(
        id=node_id or mint_id(),
        parent_id=None,
        kind=kind,
        prompt=prompt,
        response_summary="",
        bundle=bundle,
        created_at=created_at if created_at is not None else mint_timestamp(),
    )
    return VersionTree(nodes={root.id: root}, root_id=root.id, active_id=root.id)


def validate_tree(tree: VersionTree) -> list[str]:
    """Structural invariants; returns human-readable violations."""
    problems: list[str] = []
    roots = [n for n in tree.nodes.values() if n.parent_id is None]
    if len(roots) != 1:
        problems.append(f"expected exactly one parentless node, found {len(roots)}")
    elif roots[0].id != tree.root_id:
        problems.append("root_id does not match the parentless node")
    for node in tree.nodes.values():
        if node.parent_id is not None and node.parent_id not in tree.nodes:
            problems.append(f"node {node.id} has unresolvable parent {node.parent_id}")
        if node.kind not in NODE_KINDS:
            problems.append(f"node {node.id} has unknown kind {node.kind!r}")
        if node.id != tree.root_id:
            seen = {node.id}
            cursor = node.parent_id
            while cursor is not None:
                if cursor in seen:
                    problems.append(f"cycle through node {node.id}")
                    break
                seen.add(cursor)
                cursor = tree.nodes.get(cursor).parent_id if cursor in tree.nodes else None
    if tree.root_id in tree.nodes:
        reachable = {tree.root_id}
        frontier = [tree.root_id]
        while frontier:
            current = frontier.pop()
            for child in tree.children_of(current):
                if child.id not in reachable:
                    reachable.add(child.id)
                    frontier.append(child.id)
        unreachable = set(tree.nodes) - reachable
        if unreachable:
            problems.append(f"unreachable nodes: {sorted(unreachable)}")
    if tree.active_id not in tree.nodes:
        problems.append(f"active_id {tree.active_id} does not resolve")
    return problems


def ancestor_path(tree: VersionTree, node_id: str) -> list[VersionNode]:
    """Root-first chain ending at node_id."""
    node = tree.node(node_id)
    path = [node]
    while node.parent_id is not None:
        node = tree.node(node.parent_id)
        path.append(node)
    path.reverse()
    return path


def add_child(
    tree: VersionTree,
    parent_id: str,
    kind: str,
    prompt: str,
    bundle: CodeBundle,
    *,
    response_summary: str = "",
    repair: RepairReport = EMPTY_REPORT,
    node_id: str | None = None,
    created_at: str | None = None,
) -> str:
    tree.node(parent_id)
    if kind not in NODE_KINDS:
        raise ValueError(f"unknown node kind: {kind!r}")
    node = VersionNode(
        id=node_id or mint_id(),
        parent_id=parent_id,
        kind=kind,
        prompt=prompt,
        response_summary=response_summary,
        bundle=bundle,
        repair=repair,
        created_at=created_at if created_at is not None else mint_timestamp(),
    )
    tree.nodes[node.id] = node
    tree.active_id = node.id
    return node.id


def record_manual_edit(
    tree: VersionTree,
    base_node_id: str,
    new_bundle: CodeBundle,
    *,
    node_id: str | None = None,
    created_at: str | None = None,
) -> str:
    """A manual edit always creates a node, even when the bundle is unchanged:
    the history stays an explicit audit trail."""
    return add_child(
        tree,
        base_node_id,
        kind="manual-edit",
        prompt="manual edit",
        bundle=new_bundle,
        node_id=node_id,
        created_at=created_at,
    )


def duplicate_node(
    tree: VersionTree,
    node_id: str,
    *,
    new_node_id: str | None = None,
    created_at: str | None = None,
) -> str:
    source = tree.node(node_id)
    if source.parent_id is None:
        raise CannotDuplicateRoot("the root node cannot be duplicated")
    copy = replace(
        source,
        id=new_node_id or mint_id(),
        created_at=created_at if created_at is not None else mint_timestamp(),
    )
    tree.nodes[copy.id] = copy
    return copy.id


def delete_node(tree: VersionTree, node_id: str) -> int:
    """Remove the node and its whole subtree; returns the number removed."""
    node = tree.node(node_id)
    if node.parent_id is None:
        raise CannotDeleteRoot("the root node cannot be deleted")
    doomed = {node_id}
    frontier = [node_id]
    while frontier:
        current = frontier.pop()
        for child in tree.children_of(current):
            if child.id not in doomed:
                doomed.add(child.id)
                frontier.append(child.id)
    for nid in doomed:
        del tree.nodes[nid]
    if tree.active_id in doomed:
        tree.active_id = node.parent_id
    return len(doomed)


def set_active(tree: VersionTree, node_id: str) -> None:
    tree.node(node_id)
    tree.active_id = node_id


def _bundle_block(bundle: CodeBundle) -> str:
    sections = []
    for part in ("template", "style", "script"):
        text = bundle.part(part)
        if text.strip():
            sections.append(f"--- {part} ---\n{text}")
    return "\n".join(sections) if sections else "(all parts empty)"


def assemble_context(tree: VersionTree, node_id: str, cap: int = 12) -> tuple[ContextMessage, ...]:
    """Chat history for a node, from its ancestors only.

    AI rounds contribute their prompt and the model's summary; manual edits
    contribute a single user note carrying the edited code as current state.
    Beyond `cap` rounds the root round is kept, a summary marker is inserted,
    and the most recent cap-1 rounds follow.
    """
    path = ancestor_path(tree, node_id)
    rounds: list[list[ContextMessage]] = []
    for node in path:
        if node.kind == "manual-edit":
            rounds.append(
                [ContextMessage("user", f"{MANUAL_EDIT_NOTE}\n{_bundle_block(node.bundle)}")]
            )
        else:
            # The code reference stays id-free so assembled context depends
            # only on conversation content; replay fixtures then hit
            # regardless of which project minted the nodes.
            rounds.append(
                [
                    ContextMessage("user", node.prompt),
                    ContextMessage(
                        "assistant",
                        f"{node.response_summary}\n[code revision recorded]".strip(),
                    ),
                ]
            )
    if cap >= 1 and len(rounds) > cap:
        omitted = len(rounds) - cap
        marker = [ContextMessage("user", f"[{omitted} earlier round(s) omitted]")]
        rounds = [rounds[0], marker] + rounds[-(cap - 1):] if cap > 1 else [rounds[0], marker]
    messages: list[ContextMessage] = []
    for r in rounds:
        messages.extend(r)
    return tuple(messages)
