"""Semantic difference analysis and interactive parameter extraction.

Stylesheets diff at (selector, property, value) granularity, markup at
element/attribute granularity with stable positional paths, scripts as
line hunks. The hunk computation canonicalizes the operand order and
mirrors, so diff(a, b) is always the exact mirror of diff(b, a).
"""

from __future__ import annotations

import difflib
import hashlib
import re
from dataclasses import dataclass, field, replace

from . import cssparse, markup
from .cssparse import AtRule, Declaration, QualifiedRule, Stylesheet
from .markup import MarkupComment, MarkupElement, MarkupText
from .model import CodeBundle
from .patching import split_lines


class StaleDescriptor(Exception):
    """The descriptor no longer resolves: the code changed since extraction."""


class InvalidValue(Exception):
    pass


@dataclass(frozen=True)
class StyleChange:
    op: str  # added | removed | changed
    selector: str
    prop: str
    before: str | None = None
    after: str | None = None

    def to_dict(self) -> dict:
        return {
            "op": self.op,
            "selector": self.selector,
            "property": self.prop,
            "before": self.before,
            "after": self.after,
        }


@dataclass(frozen=True)
class MarkupChange:
    op: str
    path: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {"op": self.op, "path": self.path, "detail": self.detail}


@dataclass(frozen=True)
class ScriptChange:
    op: str
    from_range: tuple[int, int]  # 0-based half-open line range in the old text
    to_range: tuple[int, int]  # 0-based half-open line range in the new text
    before_text: str | None = None
    after_text: str | None = None

    def to_dict(self) -> dict:
        return {
            "op": self.op,
            "lineRange": {"from": list(self.from_range), "to": list(self.to_range)},
            "beforeText": self.before_text,
            "afterText": self.after_text,
        }


@dataclass(frozen=True)
class DiffReport:
    markup_changes: tuple[MarkupChange, ...] = ()
    style_changes: tuple[StyleChange, ...] = ()
    script_changes: tuple[ScriptChange, ...] = ()
    fallbacks: tuple[str, ...] = ()  # parts that fell back to line-based diffing

    @property
    def is_empty(self) -> bool:
        return not (self.markup_changes or self.style_changes or self.script_changes)

    def to_dict(self) -> dict:
        return {
            "markupChanges": [c.to_dict() for c in self.markup_changes],
            "styleChanges": [c.to_dict() for c in self.style_changes],
            "scriptChanges": [c.to_dict() for c in self.script_changes],
            "fallbacks": list(self.fallbacks),
        }


# ---------------------------------------------------------------------------
# Line hunks (symmetric by construction)
# ---------------------------------------------------------------------------

def _raw_opcodes(a: list[str], b: list[str]):
    sm = difflib.SequenceMatcher(None, a, b, autojunk=False)
    return [op for op in sm.get_opcodes() if op[0] != "equal"]

_MIRROR = {"insert": "delete", "delete": "insert", "replace": "replace"}


def line_hunks(a_text: str, b_text: str) -> list[ScriptChange]:
    a, b = split_lines(a_text), split_lines(b_text)
    if (a, b) <= (b, a):
        ops = _raw_opcodes(a, b)
    else:
        ops = [(_MIRROR[tag], j1, j2, i1, i2) for tag, i1, i2, j1, j2 in _raw_opcodes(b, a)]
    out: list[ScriptChange] = []
    for tag, i1, i2, j1, j2 in ops:
        if tag == "insert":
            out.append(ScriptChange("added", (i1, i2), (j1, j2), None, "\n".join(b[j1:j2])))
        elif tag == "delete":
            out.append(ScriptChange("removed", (i1, i2), (j1, j2), "\n".join(a[i1:i2]), None))
        else:
            out.append(
                ScriptChange(
                    "changed", (i1, i2), (j1, j2), "\n".join(a[i1:i2]), "\n".join(b[j1:j2])
                )
            )
    return out


# ---------------------------------------------------------------------------
# Style diff
# ---------------------------------------------------------------------------

def _selector_key(context: str, selector: str, occurrence: int) -> str:
    key = f"{context} > {selector}" if context else selector
    if occurrence:
        key += f" ({occurrence + 1})"
    return key


def style_declaration_map(sheet: Stylesheet) -> dict[tuple[str, str], str]:
    """(selector key, property) -> effective (last) value, covering nested
    at-rule contexts such as keyframe frames."""
    out: dict[tuple[str, str], str] = {}

    def walk(items, context: str) -> None:
        seen: dict[str, int] = {}
        for item in items:
            if isinstance(item, QualifiedRule):
                selector = cssparse.collapse_ws(item.selector)
                occurrence = seen.get(selector, 0)
                seen[selector] = occurrence + 1
                key = _selector_key(context, selector, occurrence)
                for child in item.items:
                    if isinstance(child, Declaration):
                        out[(key, child.prop.strip().lower())] = cssparse.collapse_ws(child.value)
                walk(
                    [c for c in item.items if not isinstance(c, Declaration)],
                    key,
                )
            elif isinstance(item, AtRule) and item.items is not None:
                head = f"@{item.name}"
                if item.prelude:
                    head += f" {cssparse.collapse_ws(item.prelude)}"
                at_key = f"{context} > {head}" if context else head
                for child in item.items:
                    if isinstance(child, Declaration):
                        out[(at_key, child.prop.strip().lower())] = cssparse.collapse_ws(
                            child.value
                        )
                walk([c for c in item.items if not isinstance(c, Declaration)], at_key)

    walk(sheet.items, "")
    return out


def diff_style_maps(a: dict, b: dict) -> list[StyleChange]:
    changes: list[StyleChange] = []
    for (selector, prop), value in a.items():
        if (selector, prop) not in b:
            changes.append(StyleChange("removed", selector, prop, before=value))
        elif b[(selector, prop)] != value:
            changes.append(
                StyleChange("changed", selector, prop, before=value, after=b[(selector, prop)])
            )
    for (selector, prop), value in b.items():
        if (selector, prop) not in a:
            changes.append(StyleChange("added", selector, prop, after=value))
    changes.sort(key=lambda c: (c.selector, c.prop, c.op))
    return changes


# ---------------------------------------------------------------------------
# Markup diff
# ---------------------------------------------------------------------------

def _meaningful_children(nodes) -> list:
    out = []
    for node in nodes:
        if isinstance(node, MarkupText) and not node.data.strip():
            continue
        out.append(node)
    return out


def _describe(node) -> str:
    if isinstance(node, MarkupElement):
        return f"<{node.tag}>"
    if isinstance(node, MarkupComment):
        return "comment"
    return f"text {markup._collapse(node.data)!r}"


def _node_path(node, position: int, parent: str) -> str:
    if isinstance(node, MarkupElement):
        name = node.tag
    elif isinstance(node, MarkupComment):
        name = "comment()"
    else:
        name = "text()"
    component = f"{name}[{position}]"
    return f"{parent}/{component}" if parent else component


def diff_markup_trees(a_tree, b_tree) -> list[MarkupChange]:
    changes: list[MarkupChange] = []

    def walk(a_nodes, b_nodes, parent: str) -> None:
        a_list, b_list = _meaningful_children(a_nodes), _meaningful_children(b_nodes)
        for i in range(max(len(a_list), len(b_list))):
            if i >= len(a_list):
                node = b_list[i]
                changes.append(MarkupChange("added", _node_path(node, i, parent), _describe(node)))
                continue
            if i >= len(b_list):
                node = a_list[i]
                changes.append(
                    MarkupChange("removed", _node_path(node, i, parent), _describe(node))
                )
                continue
            a_node, b_node = a_list[i], b_list[i]
            if isinstance(a_node, MarkupElement) and isinstance(b_node, MarkupElement):
                if a_node.tag != b_node.tag:
                    changes.append(
                        MarkupChange("removed", _node_path(a_node, i, parent), _describe(a_node))
                    )
                    changes.append(
                        MarkupChange("added", _node_path(b_node, i, parent), _describe(b_node))
                    )
                    continue
                path = _node_path(a_node, i, parent)
                a_attrs, b_attrs = dict(a_node.attrs), dict(b_node.attrs)
                for name in sorted(set(a_attrs) | set(b_attrs)):
                    if name not in b_attrs:
                        changes.append(
                            MarkupChange("changed", path, f"attribute {name} removed ({a_attrs[name]!r})")
                        )
                    elif name not in a_attrs:
                        changes.append(
                            MarkupChange("changed", path, f"attribute {name} added ({b_attrs[name]!r})")
                        )
                    elif a_attrs[name] != b_attrs[name]:
                        changes.append(
                            MarkupChange(
                                "changed",
                                path,
                                f"attribute {name}: {a_attrs[name]!r} -> {b_attrs[name]!r}",
                            )
                        )
                if a_node.tag in markup.RAW_TEXT_ELEMENTS:
                    a_raw = "".join(c.data for c in a_node.children if isinstance(c, MarkupText)).strip()
                    b_raw = "".join(c.data for c in b_node.children if isinstance(c, MarkupText)).strip()
                    if a_raw != b_raw:
                        changes.append(MarkupChange("changed", path, "raw content differs"))
                    continue
                walk(a_node.children, b_node.children, path)
            elif isinstance(a_node, MarkupText) and isinstance(b_node, MarkupText):
                a_text, b_text = markup._collapse(a_node.data), markup._collapse(b_node.data)
                if a_text != b_text:
                    changes.append(
                        MarkupChange(
                            "changed",
                            _node_path(a_node, i, parent),
                            f"text: {a_text!r} -> {b_text!r}",
                        )
                    )
            elif isinstance(a_node, MarkupComment) and isinstance(b_node, MarkupComment):
                if a_node.data.strip() != b_node.data.strip():
                    changes.append(
                        MarkupChange("changed", _node_path(a_node, i, parent), "comment differs")
                    )
            else:
                changes.append(
                    MarkupChange("removed", _node_path(a_node, i, parent), _describe(a_node))
                )
                changes.append(
                    MarkupChange("added", _node_path(b_node, i, parent), _describe(b_node))
                )

    walk(a_tree.children, b_tree.children, "")
    return changes


# ---------------------------------------------------------------------------
# Bundle diff
# ---------------------------------------------------------------------------

def diff_bundles(a: CodeBundle, b: CodeBundle) -> DiffReport:
    fallbacks: list[str] = []

    markup_changes: tuple[MarkupChange, ...] = ()
    if a.template != b.template:
        markup_changes = tuple(diff_markup_trees(markup.parse_markup(a.template), markup.parse_markup(b.template)))

    style_changes: tuple[StyleChange, ...] = ()
    script_changes: list[ScriptChange] = []
    if a.style != b.style:
        sheet_a, sheet_b = cssparse.parse_stylesheet(a.style), cssparse.parse_stylesheet(b.style)
        if sheet_a.errors or sheet_b.errors:
            fallbacks.append("style")
            script_changes.extend(line_hunks(a.style, b.style))
        else:
            style_changes = tuple(
                diff_style_maps(style_declaration_map(sheet_a), style_declaration_map(sheet_b))
            )

    if a.script != b.script:
        script_changes.extend(line_hunks(a.script, b.script))

    return DiffReport(
        markup_changes=markup_changes,
        style_changes=style_changes,
        script_changes=tuple(script_changes),
        fallbacks=tuple(fallbacks),
    )


def render_diff_text(report: DiffReport) -> str:
    """Compact deterministic text, one change per line, for LLM consumption."""
    if report.is_empty:
        return "no changes"
    lines: list[str] = []
    if report.style_changes:
        lines.append("style:")
        for c in report.style_changes:
            if c.op == "changed":
                lines.append(f"  changed {c.selector} {{ {c.prop}: {c.before} -> {c.after} }}")
            elif c.op == "added":
                lines.append(f"  added {c.selector} {{ {c.prop}: {c.after} }}")
            else:
                lines.append(f"  removed {c.selector} {{ {c.prop}: {c.before} }}")
    if report.markup_changes:
        lines.append("markup:")
        for c in report.markup_changes:
            suffix = f": {c.detail}" if c.detail else ""
            lines.append(f"  {c.op} {c.path}{suffix}")
    if report.script_changes:
        lines.append("script:")
        for c in report.script_changes:
            f1, f2 = c.from_range
            t1, t2 = c.to_range
            if c.op == "added":
                lines.append(f"  added lines {t1 + 1}-{t2} (after old line {f1})")
            elif c.op == "removed":
                lines.append(f"  removed lines {f1 + 1}-{f2}")
            else:
                lines.append(f"  changed lines {f1 + 1}-{f2} -> {t1 + 1}-{t2}")
    if report.fallbacks:
        lines.append("notes:")
        for part in report.fallbacks:
            lines.append(f"  {part} compared line-by-line (part did not parse)")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Parameter extraction ("learn by play")
# ---------------------------------------------------------------------------

VALUE_KINDS = ("color", "length", "duration", "number", "timing-function", "enum")

_HEX_COLOR_RE = re.compile(r"^#(?:[0-9a-fA-F]{3,4}|[0-9a-fA-F]{6}|[0-9a-fA-F]{8})$")
_COLOR_FN_RE = re.compile(r"^(?:rgb|rgba|hsl|hsla)\([^()]*\)$", re.IGNORECASE)
_DURATION_RE = re.compile(r"^(-?\d*\.?\d+)(s|ms)$")
_LENGTH_RE = re.compile(r"^(-?\d*\.?\d+)(px|em|rem|%|vh|vw|vmin|vmax|pt|ch|ex|cm|mm|in)$")
_NUMBER_RE = re.compile(r"^-?\d*\.?\d+$")
_TIMING_FN_RE = re.compile(r"^(?:cubic-bezier|steps)\([^()]*\)$", re.IGNORECASE)

NAMED_COLORS = {
    "black", "silver", "gray", "grey", "white", "maroon", "red", "purple",
    "fuchsia", "green", "lime", "olive", "yellow", "navy", "blue", "teal",
    "aqua", "orange", "pink", "brown", "gold", "violet", "indigo", "cyan",
    "magenta", "coral", "crimson", "salmon", "khaki", "lavender", "plum",
    "turquoise", "tan", "beige", "ivory", "transparent", "currentcolor",
}

TIMING_KEYWORDS = {"linear", "ease", "ease-in", "ease-out", "ease-in-out", "step-start", "step-end"}

ENUM_PROPERTIES = {
    "animation-direction": ("normal", "reverse", "alternate", "alternate-reverse"),
    "animation-fill-mode": ("none", "forwards", "backwards", "both"),
    "animation-play-state": ("running", "paused"),
    "position": ("static", "relative", "absolute", "fixed", "sticky"),
    "display": ("block", "inline", "inline-block", "flex", "grid", "none"),
    "visibility": ("visible", "hidden", "collapse"),
    "overflow": ("visible", "hidden", "scroll", "auto"),
}


def classify_value(prop: str, value: str) -> str | None:
    v = value.strip()
    lowered = v.lower()
    if _DURATION_RE.match(v):
        return "duration"
    if _LENGTH_RE.match(v):
        return "length"
    if _NUMBER_RE.match(v):
        return "number"
    if _HEX_COLOR_RE.match(v) or _COLOR_FN_RE.match(v) or lowered in NAMED_COLORS:
        return "color"
    if lowered in TIMING_KEYWORDS or _TIMING_FN_RE.match(v):
        return "timing-function"
    options = ENUM_PROPERTIES.get(prop.strip().lower())
    if options and lowered in options:
        return "enum"
    return None


def _numeric_bounds(kind: str, value: str) -> tuple[float, float, float] | None:
    if kind == "number":
        num = float(value)
        high = 1.0 if 0.0 <= num <= 1.0 else max(4.0 * abs(num), 10.0)
        low = 0.0 if num >= 0 else -high
        return (low, high, round((high - low) / 100, 4))
    match = _DURATION_RE.match(value) if kind == "duration" else _LENGTH_RE.match(value)
    if not match:
        return None
    num = float(match.group(1))
    high = max(4.0 * abs(num), {"duration": 1.0, "length": 100.0}[kind])
    low = 0.0 if num >= 0 else -high
    return (low, high, round((high - low) / 100, 4))


@dataclass(frozen=True)
class ParameterDescriptor:
    id: str
    part: str
    selector: str
    prop: str
    occurrence: int
    value_kind: str
    current_value: str
    unit: str = ""
    bounds: tuple[float, float, float] | None = None
    options: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "part": self.part,
            "location": {"selector": self.selector, "property": self.prop, "occurrence": self.occurrence},
            "valueKind": self.value_kind,
            "currentValue": self.current_value,
            "unit": self.unit,
            "bounds": list(self.bounds) if self.bounds else None,
            "options": list(self.options),
        }


def _descriptor_id(selector: str, prop: str, occurrence: int, value: str) -> str:
    basis = f"style|{selector}|{prop}|{occurrence}|{value}"
    return hashlib.sha1(basis.encode("utf-8")).hexdigest()[:12]


def _iter_declarations(sheet: Stylesheet):
    """Yields (selector_key, declaration, container, index) in document order."""

    def walk(items, context: str):
        seen: dict[str, int] = {}
        for item in items:
            if isinstance(item, QualifiedRule):
                selector = cssparse.collapse_ws(item.selector)
                occurrence = seen.get(selector, 0)
                seen[selector] = occurrence + 1
                key = _selector_key(context, selector, occurrence)
                for idx, child in enumerate(item.items):
                    if isinstance(child, Declaration):
                        yield key, child, item, idx
                yield from walk(
                    [c for c in item.items if not isinstance(c, Declaration)], key
                )
            elif isinstance(item, AtRule) and item.items is not None:
                head = f"@{item.name}"
                if item.prelude:
                    head += f" {cssparse.collapse_ws(item.prelude)}"
                at_key = f"{context} > {head}" if context else head
                for idx, child in enumerate(item.items):
                    if isinstance(child, Declaration):
                        yield at_key, child, item, idx
                yield from walk(
                    [c for c in item.items if not isinstance(c, Declaration)], at_key
                )

    yield from walk(sheet.items, "")


def extract_parameters(bundle: CodeBundle, focus: str | None = None) -> list[ParameterDescriptor]:
    """One descriptor per declaration whose whole value matches a known kind.
    With a focus hint, lexically matching descriptors rank first."""
    sheet = cssparse.parse_stylesheet(bundle.style)
    if sheet.errors:
        return []
    descriptors: list[ParameterDescriptor] = []
    prop_seen: dict[tuple[str, str], int] = {}
    for selector_key, decl, _container, _idx in _iter_declarations(sheet):
        prop = decl.prop.strip().lower()
        occurrence = prop_seen.get((selector_key, prop), 0)
        prop_seen[(selector_key, prop)] = occurrence + 1
        value = cssparse.collapse_ws(decl.value)
        kind = classify_value(prop, value)
        if kind is None:
            continue
        unit = ""
        match = _DURATION_RE.match(value) or _LENGTH_RE.match(value)
        if kind in ("duration", "length") and match:
            unit = match.group(2)
        descriptors.append(
            ParameterDescriptor(
                id=_descriptor_id(selector_key, prop, occurrence, value),
                part="style",
                selector=selector_key,
                prop=prop,
                occurrence=occurrence,
                value_kind=kind,
                current_value=value,
                unit=unit,
                bounds=_numeric_bounds(kind, value) if kind in ("number", "duration", "length") else None,
                options=ENUM_PROPERTIES.get(prop, ()) if kind == "enum" else (),
            )
        )
    if not focus or not focus.strip():
        return descriptors

    lowered_focus = focus.lower()
    tokens = [t for t in re.split(r"[^\w.#-]+", lowered_focus) if len(t) >= 3]

    def matches(d: ParameterDescriptor) -> bool:
        selector = d.selector.lower()
        bare = selector.lstrip(".#")
        if selector in lowered_focus or d.prop in lowered_focus:
            return True
        return any(t in selector or t in d.prop or t == bare for t in tokens)

    ranked = sorted(
        enumerate(descriptors), key=lambda pair: (0 if matches(pair[1]) else 1, pair[0])
    )
    return [d for _, d in ranked]


def apply_parameter(bundle: CodeBundle, descriptor_id: str, new_value: str) -> CodeBundle:
    """Replace exactly the targeted declaration's value; the caller records the
    result as a manual-edit node."""
    sheet = cssparse.parse_stylesheet(bundle.style)
    if sheet.errors:
        raise StaleDescriptor("style part no longer parses")
    prop_seen: dict[tuple[str, str], int] = {}
    target = None
    for selector_key, decl, container, idx in _iter_declarations(sheet):
        prop = decl.prop.strip().lower()
        occurrence = prop_seen.get((selector_key, prop), 0)
        prop_seen[(selector_key, prop)] = occurrence + 1
        value = cssparse.collapse_ws(decl.value)
        if _descriptor_id(selector_key, prop, occurrence, value) == descriptor_id:
            target = (selector_key, decl, container, idx, value, prop)
            break
    if target is None:
        raise StaleDescriptor(f"descriptor {descriptor_id} does not resolve against this bundle")
    _, decl, container, idx, value, prop = target

    kind = classify_value(prop, value)
    cleaned = cssparse.collapse_ws(new_value.strip())
    if not cleaned:
        raise InvalidValue("empty value")
    if classify_value(prop, cleaned) != kind:
        raise InvalidValue(f"{cleaned!r} is not a valid {kind} value")

    new_items = list(container.items)
    new_items[idx] = replace(decl, value=cleaned)
    _replace_container_items(sheet, container, tuple(new_items))
    return bundle.with_part("style", cssparse.serialize_stylesheet(sheet))


def _replace_container_items(sheet: Stylesheet, container, new_items: tuple) -> None:
    """Swap a container node for a copy with new items, wherever it sits."""

    def rebuild(items) -> tuple[list, bool]:
        out = []
        hit = False
        for item in items:
            if item is container:
                out.append(replace(item, items=new_items))
                hit = True
            elif isinstance(item, QualifiedRule) or (isinstance(item, AtRule) and item.items is not None):
                children, child_hit = rebuild(item.items)
                out.append(replace(item, items=tuple(children)) if child_hit else item)
                hit = hit or child_hit
            else:
                out.append(item)
        return out, hit

    sheet.items, found = rebuild(sheet.items)
    if not found:  # pragma: no cover - container always originates from sheet
        raise StaleDescriptor("declaration container vanished during rewrite")
