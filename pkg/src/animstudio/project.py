"""Project persistence: one self-contained JSON document per project."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .model import GenerationSettings
from .versioning import VersionTree, validate_tree

SCHEMA_VERSION = 1


class ProjectFormatError(Exception):
    pass


class UnknownSchemaVersion(ProjectFormatError):
    def __init__(self, version):
        super().__init__(f"unsupported project schema_version: {version!r}")
        self.version = version


@dataclass
class ProjectStore:
    project_id: str
    settings: GenerationSettings = field(default_factory=GenerationSettings)
    trees: dict[str, VersionTree] = field(default_factory=dict)


def store_to_document(store: ProjectStore) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "project_id": store.project_id,
        "settings": store.settings.to_dict(),
        "trees": {filename: tree.to_dict() for filename, tree in store.trees.items()},
    }


def store_from_document(doc: dict) -> ProjectStore:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise UnknownSchemaVersion(version)
    store = ProjectStore(
        project_id=doc["project_id"],
        settings=GenerationSettings.from_dict(doc.get("settings", {})),
        trees={fn: VersionTree.from_dict(t) for fn, t in doc.get("trees", {}).items()},
    )
    for filename, tree in store.trees.items():
        problems = validate_tree(tree)
        if problems:
            raise ProjectFormatError(f"tree {filename!r} is invalid: {problems[0]}")
        for node in tree.nodes.values():
            if node.bundle.filename != filename:
                raise ProjectFormatError(
                    f"tree {filename!r} holds a bundle named {node.bundle.filename!r}"
                )
    return store


def document_bytes(store: ProjectStore) -> bytes:
    text = json.dumps(store_to_document(store), indent=2, sort_keys=True, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def save_project(store: ProjectStore, location: str | Path) -> None:
    """Atomic write: the document appears complete or not at all."""
    path = Path(location)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(document_bytes(store))
    os.replace(tmp, path)


def load_project(location: str | Path) -> ProjectStore:
    raw = Path(location).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as err:
        raise ProjectFormatError(f"not a JSON document: {err}") from err
    return store_from_document(doc)
