import pytest

from animstudio.cssparse import (
    AtRule,
    Declaration,
    QualifiedRule,
    declaration_multiset,
    parse_stylesheet,
    serialize_stylesheet,
    sheet_signature,
)
from animstudio.markup import parse_markup, tree_signature
from animstudio.model import CodeBundle
from animstudio.repair import (
    format_bundle,
    repair_all,
    repair_misplaced_content,
    repair_nested_selector,
    repair_orphan_rules,
)


def style_bundle(style: str, template: str = "", script: str = "") -> CodeBundle:
    return CodeBundle(template=template, style=style, script=script)


# ---------------------------------------------------------------------------
# Oracles over output parse trees
# ---------------------------------------------------------------------------

def count_nested_rules(sheet) -> int:
    nested = 0

    def walk(items, inside_rule):
        nonlocal nested
        for item in items:
            if isinstance(item, QualifiedRule):
                if inside_rule:
                    nested += 1
                walk(item.items, True)
            elif isinstance(item, AtRule) and item.items is not None:
                if inside_rule:
                    nested += 1
                walk(item.items, inside_rule)

    walk(sheet.items, False)
    return nested


def count_top_level_orphans(sheet) -> int:
    return sum(1 for item in sheet.items if isinstance(item, Declaration))


def assert_style_invariants(style_text: str) -> None:
    sheet = parse_stylesheet(style_text)
    assert sheet.errors == []
    assert count_nested_rules(sheet) == 0
    assert count_top_level_orphans(sheet) == 0


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------

def test_format_css_example():
    out, flags = format_bundle(style_bundle(".a{color:red}"))
    assert out.style == ".a {\n  color: red;\n}\n"
    assert flags == []


def test_format_idempotent():
    bundle = CodeBundle(
        template="<div class='x'><span>hi</span></div>",
        style=".a{color:red;left:0}",
        script="function f(){\nreturn 1;\n}",
    )
    once, _ = format_bundle(bundle)
    twice, _ = format_bundle(once)
    assert once == twice


def test_format_preserves_parse_trees():
    style = ".a{color:red}\n@keyframes k{0%{opacity:0}}"
    template = "<div><p>one</p><p>two</p></div>"
    out, _ = format_bundle(CodeBundle(template=template, style=style))
    assert sheet_signature(parse_stylesheet(style)) == sheet_signature(parse_stylesheet(out.style))
    assert tree_signature(parse_markup(template)) == tree_signature(parse_markup(out.template))


def test_format_empty():
    out, flags = format_bundle(CodeBundle())
    assert (out.template, out.style, out.script) == ("", "", "")
    assert flags == []


def test_format_unparseable_style_passes_through():
    broken = ".a { color: red;"  # unclosed block
    out, flags = format_bundle(style_bundle(broken))
    assert out.style == broken
    assert any("style" in f for f in flags)


def test_format_unbalanced_script_passes_through():
    broken = "function f() {"
    out, flags = format_bundle(style_bundle("", script=broken))
    assert out.script == broken
    assert any("script" in f for f in flags)


# ---------------------------------------------------------------------------
# R1: misplaced content
# ---------------------------------------------------------------------------

def test_r1_moves_css_from_template():
    bundle = CodeBundle(
        template='<div class="x"></div>\n.x { color: red; }',
        style=".base { left: 0; }",
    )
    out, report = repair_misplaced_content(bundle)
    assert [e.category for e in report.entries] == ["R1"]
    assert ".x" not in out.template
    sheet = parse_stylesheet(out.style)
    selectors = [i.selector for i in sheet.items if isinstance(i, QualifiedRule)]
    assert selectors == [".base", ".x"]


def test_r1_moves_script_from_template():
    bundle = CodeBundle(
        template="<div></div>\nconst el = document.querySelector('.x'); el.remove();",
    )
    out, report = repair_misplaced_content(bundle)
    assert [e.category for e in report.entries] == ["R1"]
    assert "querySelector" in out.script
    assert "querySelector" not in out.template


def test_r1_clean_bundle_untouched():
    bundle = CodeBundle(template="<div><span>hello world</span></div>", style=".a { left: 0; }")
    out, report = repair_misplaced_content(bundle)
    assert out == bundle
    assert report.is_empty


def test_r1_two_rules_preserve_order():
    bundle = CodeBundle(
        template='<div></div>\n.first { top: 1px; }\n<span></span>\n.second { top: 2px; }',
    )
    out, report = repair_misplaced_content(bundle)
    assert len(report.entries) == 2
    sheet = parse_stylesheet(out.style)
    selectors = [i.selector for i in sheet.items if isinstance(i, QualifiedRule)]
    assert selectors == [".first", ".second"]


def test_r1_leaves_prose_and_contained_code():
    bundle = CodeBundle(
        template="<p>braces { in } prose stay</p><style>.inline { top: 0; }</style>",
    )
    out, report = repair_misplaced_content(bundle)
    assert report.entries == ()
    assert "prose stay" in out.template
    assert ".inline" in out.template


# ---------------------------------------------------------------------------
# R2: nested selectors
# ---------------------------------------------------------------------------

def test_r2_hoists_nested_rule():
    sheet = parse_stylesheet(".a { color: red; .b { left: 0; } }")
    fixed, report = repair_nested_selector(sheet)
    assert [e.category for e in report.entries] == ["R2"]
    tops = [i for i in fixed.items if isinstance(i, QualifiedRule)]
    assert [t.selector for t in tops] == [".a", ".b"]
    assert count_nested_rules(fixed) == 0


def test_r2_identity_without_nesting():
    sheet = parse_stylesheet(".a { color: red; }\n.b { left: 0; }")
    fixed, report = repair_nested_selector(sheet)
    assert report.is_empty
    assert sheet_signature(fixed) == sheet_signature(sheet)


def test_r2_two_levels_document_order():
    sheet = parse_stylesheet(".a { top: 1px; .b { top: 2px; .c { top: 3px; } } }")
    fixed, report = repair_nested_selector(sheet)
    assert len(report.entries) == 2
    assert [i.selector for i in fixed.items] == [".a", ".b", ".c"]
    assert count_nested_rules(fixed) == 0


def test_r2_preserves_declarations():
    text = ".a { color: red; .b { left: 0; } top: 4px; }"
    sheet = parse_stylesheet(text)
    fixed, _ = repair_nested_selector(sheet)
    assert declaration_multiset(fixed) == declaration_multiset(sheet)


def test_r2_hoists_keyframes_out_of_rule():
    sheet = parse_stylesheet(".a { color: red; @keyframes k { from { opacity: 0; } } }")
    fixed, report = repair_nested_selector(sheet)
    assert len(report.entries) == 1
    kinds = [type(i).__name__ for i in fixed.items]
    assert kinds == ["QualifiedRule", "AtRule"]
    # Frames inside keyframes are not nesting violations.
    assert count_nested_rules(parse_stylesheet(serialize_stylesheet(fixed))) == 0


def test_r2_leaves_media_block_rules_alone():
    sheet = parse_stylesheet("@media screen { .a { color: red; } }")
    fixed, report = repair_nested_selector(sheet)
    assert report.is_empty
    assert sheet_signature(fixed) == sheet_signature(sheet)


# ---------------------------------------------------------------------------
# R3: orphan declarations
# ---------------------------------------------------------------------------

def test_r3_orphan_attaches_to_next_rule():
    sheet = parse_stylesheet("animation: spin 2s linear infinite;\n.loader { width: 10px; }")
    fixed, report = repair_orphan_rules(sheet)
    assert [e.category for e in report.entries] == ["R3"]
    assert count_top_level_orphans(fixed) == 0
    loader = next(i for i in fixed.items if isinstance(i, QualifiedRule))
    props = [d.prop for d in loader.items if isinstance(d, Declaration)]
    assert props == ["width", "animation"]


def test_r3_identity_without_orphans():
    sheet = parse_stylesheet(".a { color: red; }")
    fixed, report = repair_orphan_rules(sheet)
    assert report.is_empty
    assert sheet_signature(fixed) == sheet_signature(sheet)


def test_r3_trailing_orphan_attaches_to_previous():
    sheet = parse_stylesheet(".a { color: red; }\nanimation: spin 2s;")
    fixed, report = repair_orphan_rules(sheet)
    assert len(report.entries) == 1
    assert "previous" in report.entries[0].description
    assert count_top_level_orphans(fixed) == 0
    assert declaration_multiset(fixed) == declaration_multiset(sheet)


def test_r3_skips_at_rules_when_searching_next():
    sheet = parse_stylesheet(
        "opacity: 0.5;\n@keyframes k { from { top: 0; } }\n.target { left: 1px; }"
    )
    fixed, _ = repair_orphan_rules(sheet)
    target = next(
        i for i in fixed.items if isinstance(i, QualifiedRule) and i.selector == ".target"
    )
    props = [d.prop for d in target.items if isinstance(d, Declaration)]
    assert "opacity" in props


def test_r3_fallback_rule_when_no_rules_exist():
    sheet = parse_stylesheet("animation: spin 2s;\nopacity: 1;")
    fixed, report = repair_orphan_rules(sheet)
    assert count_top_level_orphans(fixed) == 0
    rules = [i for i in fixed.items if isinstance(i, QualifiedRule)]
    assert len(rules) == 1 and rules[0].selector == ":root"
    assert any("fallback" in f for f in report.flags)
    assert declaration_multiset(fixed) == declaration_multiset(sheet)


# ---------------------------------------------------------------------------
# repair_all
# ---------------------------------------------------------------------------

ALL_SCENARIOS = CodeBundle(
    template='<div class="loader"></div>\n.misplaced { border: 1px solid red; }',
    style=(
        "animation: spin 2s linear infinite;\n"
        ".loader { width: 40px; .inner { height: 20px; } }\n"
    ),
)


def test_repair_all_full_pipeline():
    out, report = repair_all(ALL_SCENARIOS)
    categories = [e.category for e in report.entries]
    assert "R1" in categories and "R2" in categories and "R3" in categories
    assert len(report.entries) >= 3
    assert_style_invariants(out.style)


def test_repair_all_clean_identity():
    clean, _ = repair_all(CodeBundle(template="<div></div>", style=".a { left: 0; }"))
    out, report = repair_all(clean)
    assert out == clean
    assert report.is_empty


def test_repair_all_only_r2_categorized():
    out, report = repair_all(style_bundle(".a { color: red; .b { left: 0; } }"))
    assert [e.category for e in report.entries] == ["R2"]
    assert_style_invariants(out.style)


def test_repair_all_fixed_point():
    first, report1 = repair_all(ALL_SCENARIOS)
    second, report2 = repair_all(first)
    assert second == first
    assert report2.is_empty
    assert not report1.is_empty


def test_repair_all_conserves_declarations():
    before_sheet = parse_stylesheet(ALL_SCENARIOS.style)
    template_sheet = parse_stylesheet(".misplaced { border: 1px solid red; }")
    expected = declaration_multiset(before_sheet)
    for key, count in declaration_multiset(template_sheet).items():
        expected[key] = expected.get(key, 0) + count
    out, _ = repair_all(ALL_SCENARIOS)
    assert declaration_multiset(parse_stylesheet(out.style)) == expected
