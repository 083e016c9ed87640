import random

import pytest
from hypothesis import given, settings, strategies as st

from animstudio.diffing import (
    DiffReport,
    InvalidValue,
    StaleDescriptor,
    apply_parameter,
    classify_value,
    diff_bundles,
    extract_parameters,
    line_hunks,
    render_diff_text,
)
from animstudio.model import CodeBundle
from animstudio.repair import repair_all


BASE = CodeBundle(
    template='<div class="box"><span>go</span></div>',
    style=".box { left: 0; width: 40px; }\n@keyframes spin { from { opacity: 0; } }\n",
    script="let n = 1;\nconsole.log(n);\n",
)


def test_identical_bundles_empty_report():
    report = diff_bundles(BASE, BASE)
    assert report.is_empty
    assert render_diff_text(report) == "no changes"


def test_single_style_value_change():
    changed = BASE.with_part("style", BASE.style.replace("left: 0;", "left: 4px;"))
    report = diff_bundles(BASE, changed)
    assert len(report.style_changes) == 1
    c = report.style_changes[0]
    assert (c.op, c.selector, c.prop, c.before, c.after) == ("changed", ".box", "left", "0", "4px")
    assert report.markup_changes == () and report.script_changes == ()


def test_added_element_reported():
    b = BASE.with_part("template", '<div class="box"><span>go</span><i></i></div>')
    report = diff_bundles(BASE, b)
    assert len(report.markup_changes) == 1
    assert report.markup_changes[0].op == "added"
    assert report.markup_changes[0].path.endswith("i[1]")


def test_attribute_change_reported():
    b = BASE.with_part("template", '<div class="box big"><span>go</span></div>')
    report = diff_bundles(BASE, b)
    assert len(report.markup_changes) == 1
    assert "class" in report.markup_changes[0].detail


def test_keyframe_frame_changes_are_scoped():
    b = BASE.with_part("style", BASE.style.replace("opacity: 0;", "opacity: 0.5;"))
    report = diff_bundles(BASE, b)
    assert len(report.style_changes) == 1
    assert report.style_changes[0].selector == "@keyframes spin > from"


def test_script_hunks():
    b = BASE.with_part("script", "let n = 2;\nconsole.log(n);\nconsole.log('done');\n")
    report = diff_bundles(BASE, b)
    ops = sorted(c.op for c in report.script_changes)
    assert "changed" in ops or "added" in ops
    assert render_diff_text(report).startswith("script:")


def test_unparseable_style_falls_back_to_lines():
    broken_a = BASE.with_part("style", ".box { left: 0;")
    broken_b = BASE.with_part("style", ".box { left: 9;")
    report = diff_bundles(broken_a, broken_b)
    assert "style" in report.fallbacks
    assert report.script_changes  # line hunks carried the difference
    assert "line-by-line" in render_diff_text(report)


def mirror_op(op: str) -> str:
    return {"added": "removed", "removed": "added", "changed": "changed"}[op]


def assert_mirrored(a: CodeBundle, b: CodeBundle):
    fwd = diff_bundles(a, b)
    rev = diff_bundles(b, a)
    assert len(fwd.style_changes) == len(rev.style_changes)
    assert sorted((mirror_op(c.op), c.selector, c.prop) for c in fwd.style_changes) == sorted(
        (c.op, c.selector, c.prop) for c in rev.style_changes
    )
    assert len(fwd.markup_changes) == len(rev.markup_changes)
    assert len(fwd.script_changes) == len(rev.script_changes)
    fwd_script = sorted((mirror_op(c.op), c.to_range, c.from_range) for c in fwd.script_changes)
    rev_script = sorted((c.op, c.from_range, c.to_range) for c in rev.script_changes)
    assert fwd_script == rev_script
    for f, r in zip(fwd.style_changes, rev.style_changes):
        if f.op == "changed":
            assert (f.before, f.after) == (r.after, r.before)


def test_symmetry_fixture():
    b = CodeBundle(
        template='<div class="box"><em>x</em></div>',
        style=".box { left: 3px; color: red; }\n.extra { top: 1px; }\n",
        script="let n = 1;\nlet m = 2;\n",
    )
    assert_mirrored(BASE, b)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_script_hunk_symmetry_property(seed):
    rng = random.Random(seed)
    a = "\n".join(rng.choice("xyz") for _ in range(rng.randint(0, 10)))
    b = "\n".join(rng.choice("xyz") for _ in range(rng.randint(0, 10)))
    fwd = line_hunks(a, b)
    rev = line_hunks(b, a)
    assert len(fwd) == len(rev)
    assert sorted((mirror_op(c.op), c.to_range, c.from_range) for c in fwd) == sorted(
        (c.op, c.from_range, c.to_range) for c in rev
    )


def test_k_mutations_yield_k_style_changes():
    rng = random.Random(99)
    style = "\n".join(
        f".r{i} {{ left: {i}px; top: {i * 2}px; opacity: 0.{i + 1}; }}" for i in range(6)
    )
    base = CodeBundle(style=style)
    for k in (1, 2, 3, 5):
        lines = style
        mutated = lines
        props = [(i, p) for i in range(6) for p in ("left", "top", "opacity")]
        picked = rng.sample(props, k)
        for i, prop in picked:
            if prop == "left":
                mutated = mutated.replace(f"left: {i}px", f"left: {i + 50}px")
            elif prop == "top":
                mutated = mutated.replace(f"top: {i * 2}px", f"top: {i * 2 + 50}px")
            else:
                mutated = mutated.replace(f"opacity: 0.{i + 1}", f"opacity: 0.9{i}")
        report = diff_bundles(base, CodeBundle(style=mutated))
        assert len(report.style_changes) == k


def test_render_deterministic():
    changed = BASE.with_part("style", BASE.style.replace("left: 0;", "left: 4px;"))
    report = diff_bundles(BASE, changed)
    assert render_diff_text(report) == render_diff_text(report)
    assert "changed .box { left: 0 -> 4px }" in render_diff_text(report)


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

def test_extract_duration_descriptor():
    bundle = CodeBundle(style=".a { animation-duration: 2s; }")
    params = extract_parameters(bundle)
    assert len(params) == 1
    d = params[0]
    assert (d.value_kind, d.current_value, d.unit) == ("duration", "2s", "s")
    assert d.bounds is not None and d.bounds[0] == 0


def test_extract_empty_style():
    assert extract_parameters(CodeBundle()) == []


def test_extract_classification_matrix():
    assert classify_value("color", "#ff0033") == "color"
    assert classify_value("background", "rgba(0, 0, 0, 0.5)") == "color"
    assert classify_value("color", "tomato") is None  # not in the named subset
    assert classify_value("color", "red") == "color"
    assert classify_value("width", "40px") == "length"
    assert classify_value("opacity", "0.5") == "number"
    assert classify_value("animation-timing-function", "ease-in-out") == "timing-function"
    assert classify_value("animation-timing-function", "cubic-bezier(0.1, 0.7, 1, 0.1)") == "timing-function"
    assert classify_value("animation-direction", "alternate") == "enum"
    assert classify_value("animation-name", "spin") is None
    assert classify_value("animation", "spin 2s linear infinite") is None


def test_focus_ranks_matching_selector_first():
    bundle = CodeBundle(style=".a { left: 1px; }\n.b { top: 2px; }")
    plain = extract_parameters(bundle)
    assert [d.selector for d in plain] == [".a", ".b"]
    focused = extract_parameters(bundle, focus="please make .b taller")
    assert focused[0].selector == ".b"
    again = extract_parameters(bundle, focus="please make .b taller")
    assert [d.id for d in focused] == [d.id for d in again]


def test_apply_parameter_changes_exactly_one_declaration():
    bundle, _ = repair_all(CodeBundle(style=".a { animation-duration: 2s; left: 3px; }"))
    d = next(p for p in extract_parameters(bundle) if p.value_kind == "duration")
    out = apply_parameter(bundle, d.id, "500ms")
    report = diff_bundles(bundle, out)
    assert len(report.style_changes) == 1
    change = report.style_changes[0]
    assert (change.prop, change.before, change.after) == ("animation-duration", "2s", "500ms")


def test_apply_parameter_noop_roundtrip():
    bundle, _ = repair_all(CodeBundle(style=".a { left: 3px; opacity: 0.4; }"))
    for d in extract_parameters(bundle):
        out = apply_parameter(bundle, d.id, d.current_value)
        assert diff_bundles(bundle, out).is_empty


def test_apply_parameter_stale_descriptor():
    bundle = CodeBundle(style=".a { left: 3px; }")
    d = extract_parameters(bundle)[0]
    edited = bundle.with_part("style", ".a { left: 9px; }")
    with pytest.raises(StaleDescriptor):
        apply_parameter(edited, d.id, "4px")


def test_apply_parameter_invalid_value():
    bundle = CodeBundle(style=".a { left: 3px; }")
    d = extract_parameters(bundle)[0]
    with pytest.raises(InvalidValue):
        apply_parameter(bundle, d.id, "fast")
