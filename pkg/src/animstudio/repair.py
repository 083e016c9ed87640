"""Automatic post-generation code correction.

Three repair passes run between formatting passes:

  R1 - stylesheet or script text that landed in the template (outside a
       style/script container) is moved to the matching bundle part;
  R2 - rules nested inside another rule's declaration block are hoisted
       out, placed right after their former parent;
  R3 - declarations stranded at the stylesheet top level are attached to
       the next rule in document order (the previous one for a trailing
       run, a flagged fallback rule when there are no rules at all).

Repairs move content, never delete it. Anything unclassifiable stays
where it is and shows up in the report flags.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import cssparse, markup, scriptlite
from .cssparse import AtRule, Comment, Declaration, QualifiedRule, Raw, Stylesheet
from .markup import MarkupElement, MarkupText, MarkupTree
from .model import CodeBundle

REPAIR_CATEGORIES = ("R1", "R2", "R3", "format", "parse-recovery")


@dataclass(frozen=True)
class RepairEntry:
    category: str
    description: str
    before_span: tuple[int, int] | None = None
    after_location: str | None = None

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "description": self.description,
            "before_span": list(self.before_span) if self.before_span else None,
            "after_location": self.after_location,
        }

    @classmethod
    def from_dict(cls, data: dict) -> RepairEntry:
        span = data.get("before_span")
        return cls(
            category=data["category"],
            description=data["description"],
            before_span=tuple(span) if span else None,
            after_location=data.get("after_location"),
        )


@dataclass(frozen=True)
class RepairReport:
    entries: tuple[RepairEntry, ...] = ()
    flags: tuple[str, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.entries

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries], "flags": list(self.flags)}

    @classmethod
    def from_dict(cls, data: dict) -> RepairReport:
        return cls(
            entries=tuple(RepairEntry.from_dict(e) for e in data.get("entries", [])),
            flags=tuple(data.get("flags", [])),
        )

    def merged(self, other: RepairReport) -> RepairReport:
        flags = list(self.flags)
        for f in other.flags:
            if f not in flags:
                flags.append(f)
        return RepairReport(self.entries + other.entries, tuple(flags))


EMPTY_REPORT = RepairReport()


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------

def format_bundle(bundle: CodeBundle) -> tuple[CodeBundle, list[str]]:
    """Beautify all three parts. A part that does not parse is passed through
    unchanged and flagged."""
    flags: list[str] = []
    out = bundle

    if bundle.template.strip():
        tree = markup.parse_markup(bundle.template)
        if tree.errors:
            flags.extend(f"format: template: {e}" for e in tree.errors)
        out = out.with_part("template", markup.serialize_markup(tree))
    else:
        out = out.with_part("template", "")

    if bundle.style.strip():
        sheet = cssparse.parse_stylesheet(bundle.style)
        if sheet.errors:
            flags.extend(f"format: style: {e}" for e in sheet.errors)
            out = out.with_part("style", bundle.style)
        else:
            out = out.with_part("style", cssparse.serialize_stylesheet(sheet))
    else:
        out = out.with_part("style", "")

    if bundle.script.strip():
        script_errors = scriptlite.parse_script(bundle.script)
        if script_errors:
            flags.extend(f"format: script: {e}" for e in script_errors)
            out = out.with_part("script", bundle.script)
        else:
            out = out.with_part("script", scriptlite.format_script(bundle.script))
    else:
        out = out.with_part("script", "")

    return out, flags


def _is_css_fragment(text: str) -> bool:
    """At least one complete rule or at-rule, no garbage, no orphan
    declarations (those could just be prose with a colon)."""
    if "{" not in text:
        return False
    sheet = cssparse.parse_stylesheet(text)
    if sheet.errors or not sheet.items:
        return False
    has_rule = any(isinstance(i, (QualifiedRule, AtRule)) for i in sheet.items)
    clean = all(isinstance(i, (QualifiedRule, AtRule, Comment)) for i in sheet.items)
    return has_rule and clean


# ---------------------------------------------------------------------------
# R1: misplaced content in the template
# ---------------------------------------------------------------------------

def repair_misplaced_content(bundle: CodeBundle) -> tuple[CodeBundle, RepairReport]:
    if not bundle.template.strip():
        return bundle, EMPTY_REPORT

    tree = markup.parse_markup(bundle.template)
    entries: list[RepairEntry] = []
    flags: list[str] = []
    moved_style: list[str] = []
    moved_script: list[str] = []

    def sweep(children: list, inside_raw: bool) -> list:
        kept = []
        for node in children:
            if isinstance(node, MarkupElement):
                child_raw = inside_raw or node.tag in markup.RAW_TEXT_ELEMENTS
                node.children = sweep(node.children, child_raw)
                kept.append(node)
                continue
            if inside_raw or not isinstance(node, MarkupText):
                kept.append(node)
                continue
            text = node.data.strip()
            if not text:
                kept.append(node)
                continue
            if _is_css_fragment(text):
                moved_style.append(text)
                entries.append(
                    RepairEntry(
                        category="R1",
                        description="stylesheet text in template moved to the style part",
                        before_span=(node.offset, node.offset + len(node.data)),
                        after_location="style:append",
                    )
                )
                continue
            if scriptlite.looks_like_script(text):
                moved_script.append(text)
                entries.append(
                    RepairEntry(
                        category="R1",
                        description="script text in template moved to the script part",
                        before_span=(node.offset, node.offset + len(node.data)),
                        after_location="script:append",
                    )
                )
                continue
            if "{" in text and "}" in text:
                flags.append(
                    "parse-recovery: template text looks code-like but was left in place"
                )
            kept.append(node)
        return kept

    tree.children = sweep(tree.children, inside_raw=False)

    if not entries:
        return bundle, RepairReport(flags=tuple(flags))

    out = bundle.with_part("template", markup.serialize_markup(tree))
    if moved_style:
        joined = "\n".join(moved_style)
        out = out.with_part("style", (out.style + "\n" + joined).strip("\n") + "\n")
    if moved_script:
        joined = "\n".join(moved_script)
        out = out.with_part("script", (out.script + "\n" + joined).strip("\n") + "\n")
    return out, RepairReport(tuple(entries), tuple(flags))


# ---------------------------------------------------------------------------
# R2: rules nested inside another rule's block
# ---------------------------------------------------------------------------

def repair_nested_selector(sheet: Stylesheet) -> tuple[Stylesheet, RepairReport]:
    entries: list[RepairEntry] = []

    def label(item) -> str:
        if isinstance(item, QualifiedRule):
            return cssparse.collapse_ws(item.selector) or "{anonymous}"
        return f"@{item.name}"

    def fix_item(item) -> list:
        """[cleaned item, *hoisted descendants], document order parent first."""
        if isinstance(item, QualifiedRule):
            kept: list = []
            trailing: list = []
            for child in item.items:
                if isinstance(child, (QualifiedRule, AtRule)):
                    entries.append(
                        RepairEntry(
                            category="R2",
                            description=f"rule '{label(child)}' hoisted out of '{label(item)}'",
                            before_span=child.span,
                            after_location=f"after '{label(item)}'",
                        )
                    )
                    trailing.extend(fix_item(child))
                else:
                    kept.append(child)
            return [replace(item, items=tuple(kept)), *trailing]
        if isinstance(item, AtRule) and item.items is not None:
            children: list = []
            for child in item.items:
                children.extend(fix_item(child))
            return [replace(item, items=tuple(children))]
        return [item]

    out_items: list = []
    for item in sheet.items:
        out_items.extend(fix_item(item))
    fixed = Stylesheet(items=out_items, errors=list(sheet.errors))
    return fixed, RepairReport(tuple(entries))


# ---------------------------------------------------------------------------
# R3: orphan declarations at the stylesheet top level
# ---------------------------------------------------------------------------

FALLBACK_SELECTOR = ":root"


def repair_orphan_rules(sheet: Stylesheet) -> tuple[Stylesheet, RepairReport]:
    items = list(sheet.items)
    orphan_positions = [i for i, it in enumerate(items) if isinstance(it, Declaration)]
    if not orphan_positions:
        return sheet, EMPTY_REPORT

    entries: list[RepairEntry] = []
    flags: list[str] = []
    rule_positions = [i for i, it in enumerate(items) if isinstance(it, QualifiedRule)]

    if not rule_positions:
        orphans = [items[i] for i in orphan_positions]
        rest = [it for it in items if not isinstance(it, Declaration)]
        fallback = QualifiedRule(FALLBACK_SELECTOR, tuple(orphans))
        for d in orphans:
            entries.append(
                RepairEntry(
                    category="R3",
                    description=(
                        f"orphan declaration '{d.prop}' wrapped in fallback rule "
                        f"'{FALLBACK_SELECTOR}' (no rules existed)"
                    ),
                    before_span=d.span,
                    after_location=f"rule '{FALLBACK_SELECTOR}'",
                )
            )
        flags.append("parse-recovery: orphan declarations wrapped in a fallback rule")
        return Stylesheet(rest + [fallback], list(sheet.errors)), RepairReport(
            tuple(entries), tuple(flags)
        )

    # Assign each orphan to the next qualified rule, or the previous one when
    # none follows. At-rules are skipped while searching forward.
    assignments: dict[int, list[Declaration]] = {i: [] for i in rule_positions}
    for pos in orphan_positions:
        nxt = next((r for r in rule_positions if r > pos), None)
        target = nxt if nxt is not None else max(r for r in rule_positions if r < pos)
        decl = items[pos]
        assignments[target].append(decl)
        entries.append(
            RepairEntry(
                category="R3",
                description=(
                    f"orphan declaration '{decl.prop}' attached to "
                    f"{'next' if nxt is not None else 'previous'} rule "
                    f"'{cssparse.collapse_ws(items[target].selector)}'"
                ),
                before_span=decl.span,
                after_location=f"rule '{cssparse.collapse_ws(items[target].selector)}'",
            )
        )

    out_items: list = []
    for i, item in enumerate(items):
        if isinstance(item, Declaration):
            continue
        if i in assignments and assignments[i]:
            item = replace(item, items=item.items + tuple(assignments[i]))
        out_items.append(item)
    return Stylesheet(out_items, list(sheet.errors)), RepairReport(tuple(entries), tuple(flags))


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

def repair_all(bundle: CodeBundle) -> tuple[CodeBundle, RepairReport]:
    """format -> R1 -> R2 -> R3 -> format. Applying it twice makes no further
    repairs (fixed point)."""
    formatted, fmt_flags = format_bundle(bundle)
    report = RepairReport(flags=tuple(fmt_flags))

    moved, r1 = repair_misplaced_content(formatted)
    report = report.merged(r1)

    out = moved
    if moved.style.strip():
        sheet = cssparse.parse_stylesheet(moved.style)
        if sheet.errors:
            report = report.merged(
                RepairReport(flags=tuple(f"parse-recovery: style: {e}" for e in sheet.errors))
            )
        else:
            sheet, r2 = repair_nested_selector(sheet)
            report = report.merged(r2)
            sheet, r3 = repair_orphan_rules(sheet)
            report = report.merged(r3)
            raw_flags = [
                "parse-recovery: unclassifiable stylesheet fragment left in place"
                for item in sheet.items
                if isinstance(item, Raw)
            ]
            if raw_flags:
                report = report.merged(RepairReport(flags=(raw_flags[0],)))
            out = moved.with_part("style", cssparse.serialize_stylesheet(sheet))

    final, final_flags = format_bundle(out)
    report = report.merged(RepairReport(flags=tuple(final_flags)))
    return final, report
