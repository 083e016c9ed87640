import json

import pytest
from hypothesis import given, settings, strategies as st

from animstudio.model import CodeBundle, GenerationSettings
from animstudio.project import (
    ProjectFormatError,
    ProjectStore,
    UnknownSchemaVersion,
    document_bytes,
    load_project,
    save_project,
    store_from_document,
    store_to_document,
)
from animstudio.versioning import add_child, new_tree


def small_store(project_id="p-1") -> ProjectStore:
    tree = new_tree(CodeBundle(filename="index.html"))
    return ProjectStore(project_id=project_id, trees={"index.html": tree})


def test_roundtrip_empty_project(tmp_path):
    store = small_store()
    path = tmp_path / "p.json"
    save_project(store, path)
    assert load_project(path) == store


def test_roundtrip_branched_tree(tmp_path):
    store = small_store()
    tree = store.trees["index.html"]
    a = add_child(tree, tree.root_id, "ai-generated", "a", CodeBundle(style=".a{left:0}"), response_summary="sa")
    add_child(tree, a, "ai-generated", "deep", CodeBundle(style=".d{top:1px}"))
    add_child(tree, tree.root_id, "manual-edit", "manual edit", CodeBundle(template="<i></i>"))
    path = tmp_path / "p.json"
    save_project(store, path)
    loaded = load_project(path)
    assert loaded == store
    assert loaded.trees["index.html"].active_id == store.trees["index.html"].active_id
    edges = {(n.id, n.parent_id) for n in loaded.trees["index.html"].nodes.values()}
    assert edges == {(n.id, n.parent_id) for n in store.trees["index.html"].nodes.values()}


def test_unknown_schema_version_rejected(tmp_path):
    store = small_store()
    doc = store_to_document(store)
    doc["schema_version"] = 99
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(UnknownSchemaVersion):
        load_project(path)


def test_filename_mismatch_rejected():
    store = small_store()
    doc = store_to_document(store)
    doc["trees"]["other.html"] = doc["trees"].pop("index.html")
    with pytest.raises(ProjectFormatError):
        store_from_document(doc)


def test_non_json_rejected(tmp_path):
    path = tmp_path / "junk.json"
    path.write_text("not json at all")
    with pytest.raises(ProjectFormatError):
        load_project(path)


def test_document_bytes_stable():
    store = small_store()
    assert document_bytes(store) == document_bytes(store)


@settings(max_examples=40, deadline=None)
@given(
    st.text(max_size=80),
    st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=120),
)
def test_roundtrip_unicode_and_empty_parts(prompt, style_text):
    store = small_store()
    tree = store.trees["index.html"]
    add_child(
        tree,
        tree.root_id,
        "ai-generated",
        prompt,
        CodeBundle(style=style_text),
        response_summary="s",
    )
    assert store_from_document(json.loads(document_bytes(store).decode("utf-8"))) == store
