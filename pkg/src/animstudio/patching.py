"""Line-marked incremental edit mechanics.

Edit scripts address lines of a marked copy of the source, where every
line carries a ``(N) | `` prefix. Application resolves every edit
against those markers before splicing, so edits on adjacent lines can
never shift one another's targets. Inserted content is tracked
separately from original rows, which also means content that merely
looks like a marker can never be mistaken for one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

MARKER_RE = re.compile(r"^\((\d+)\) \| ?")

EDIT_KINDS = ("insert", "remove", "update")


class MalformedMarker(Exception):
    """A line of supposedly marked text does not start with '(N) | '."""


class MarkerNotFound(Exception):
    """An edit referenced a marker absent from the working text.

    Unreachable when a validated script is applied to the text it was
    generated against; kept as a defensive error so a corrupted edit
    round can fall back to full regeneration instead of splicing blind.
    """


class EditScriptInvalid(Exception):
    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(v.message for v in violations))
        self.violations = violations


@dataclass(frozen=True)
class LineMarkedText:
    raw: str
    marked: str


@dataclass(frozen=True)
class Edit:
    kind: str
    from_line: int
    to_line: int
    content: str | None = None


@dataclass(frozen=True)
class EditScript:
    part: str
    edits: tuple[Edit, ...]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    edit_index: int | None = None


@dataclass(frozen=True)
class EditOutcome:
    edit_index: int
    status: str  # applied | skipped
    reason: str | None = None


@dataclass(frozen=True)
class ApplyReport:
    applied_count: int
    skipped_count: int
    outcomes: tuple[EditOutcome, ...]
    result_line_count: int


def split_lines(text: str) -> list[str]:
    return [] if text == "" else text.split("\n")


def line_count(text: str) -> int:
    return 0 if text == "" else text.count("\n") + 1


def mark_lines(text: str) -> LineMarkedText:
    """Prefix each line with its 1-based '(N) | ' marker. Empty text stays empty."""
    marked = "\n".join(f"({i}) | {line}" for i, line in enumerate(split_lines(text), 1))
    return LineMarkedText(raw=text, marked=marked)


def strip_markers(marked: LineMarkedText | str) -> str:
    """Remove '(N) | ' prefixes, preserving content bytes exactly."""
    text = marked.marked if isinstance(marked, LineMarkedText) else marked
    if text == "":
        return ""
    out = []
    for i, line in enumerate(text.split("\n"), 1):
        m = MARKER_RE.match(line)
        if not m:
            raise MalformedMarker(f"line {i} lacks a '(N) | ' prefix: {line[:60]!r}")
        out.append(line[m.end():])
    return "\n".join(out)


def _content_lines(content: str | None) -> list[str]:
    # A trailing newline in edit content is not significant.
    if not content:
        return []
    lines = content.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def validate_script(script: EditScript, text_line_count: int) -> list[Violation]:
    """Check an edit script against a target length. Violations are data, not exceptions."""
    violations: list[Violation] = []
    rangelike: list[tuple[int, int, int]] = []  # (index, from, to) for remove/update
    inserts: list[tuple[int, int]] = []  # (index, point)

    for i, e in enumerate(script.edits):
        if e.kind not in EDIT_KINDS:
            violations.append(Violation("bad-kind", f"edit {i}: unknown kind {e.kind!r}", i))
            continue
        if e.from_line < 1 or e.to_line < 1:
            violations.append(
                Violation("out-of-range", f"edit {i}: line numbers are 1-based, got {e.from_line}..{e.to_line}", i)
            )
            continue
        if e.from_line > e.to_line:
            violations.append(
                Violation("inverted-range", f"edit {i}: fromLine {e.from_line} > toLine {e.to_line}", i)
            )
            continue
        if e.kind == "insert":
            if e.from_line != e.to_line:
                violations.append(
                    Violation("insert-span", f"edit {i}: insert requires fromLine == toLine", i)
                )
                continue
            if e.from_line > text_line_count + 1:
                violations.append(
                    Violation(
                        "out-of-range",
                        f"edit {i}: insert point {e.from_line} beyond end-of-file position {text_line_count + 1}",
                        i,
                    )
                )
                continue
            if e.content is None:
                violations.append(Violation("missing-content", f"edit {i}: insert has no content", i))
                continue
            inserts.append((i, e.from_line))
        else:
            if e.to_line > text_line_count:
                violations.append(
                    Violation(
                        "out-of-range",
                        f"edit {i}: range {e.from_line}..{e.to_line} exceeds {text_line_count} lines",
                        i,
                    )
                )
                continue
            if e.kind == "update" and e.content is None:
                violations.append(Violation("missing-content", f"edit {i}: update has no content", i))
                continue
            if e.kind == "remove" and e.content is not None:
                violations.append(Violation("unexpected-content", f"edit {i}: remove carries content", i))
                continue
            rangelike.append((i, e.from_line, e.to_line))

    # Overlaps, only among edits that passed the per-edit checks.
    for a in range(len(rangelike)):
        ia, fa, ta = rangelike[a]
        for b in range(a + 1, len(rangelike)):
            ib, fb, tb = rangelike[b]
            if not (ta < fb or tb < fa):
                violations.append(
                    Violation(
                        "overlap",
                        f"edits {ia} and {ib} overlap on lines {max(fa, fb)}..{min(ta, tb)}",
                        ib,
                    )
                )
    for ii, point in inserts:
        for ir, fr, tr in rangelike:
            # An insert point strictly inside an edited range (including its
            # first line) refers to a line that edit replaces or removes.
            if fr <= point <= tr:
                violations.append(
                    Violation(
                        "overlap",
                        f"insert edit {ii} at line {point} falls inside edit {ir}'s range {fr}..{tr}",
                        ii,
                    )
                )
    seen_points: dict[int, int] = {}
    for ii, point in inserts:
        if point in seen_points:
            violations.append(
                Violation(
                    "duplicate-insert-point",
                    f"edits {seen_points[point]} and {ii} both insert at line {point}",
                    ii,
                )
            )
        else:
            seen_points[point] = ii
    return violations


# Working rows are (marker_number | None, content): original lines keep their
# marker number, inserted lines carry None and are never matched by a query.
_Rows = list


def _find(rows: _Rows, number: int) -> int:
    for i, (mark, _) in enumerate(rows):
        if mark == number:
            return i
    raise MarkerNotFound(f"marker ({number}) not present in working text")


def _apply_one(rows: _Rows, edit: Edit, original_count: int) -> _Rows:
    new_rows = [(None, line) for line in _content_lines(edit.content)]
    if edit.kind == "insert":
        if edit.from_line == original_count + 1:
            return rows + new_rows
        at = _find(rows, edit.from_line)
        return rows[:at] + new_rows + rows[at:]
    start = _find(rows, edit.from_line)
    end = _find(rows, edit.to_line)
    if edit.kind == "remove":
        return rows[:start] + rows[end + 1:]
    return rows[:start] + new_rows + rows[end + 1:]


def apply_edits(
    text: str,
    script: EditScript,
    *,
    validate: bool = True,
    lenient: bool = False,
) -> tuple[str, ApplyReport]:
    """Apply a validated edit script; returns the new text and a per-edit report.

    Raises EditScriptInvalid when validation fails and MarkerNotFound on an
    unresolvable anchor (lenient=True records the edit as skipped instead).
    """
    if validate:
        violations = validate_script(script, line_count(text))
        if violations:
            raise EditScriptInvalid(violations)
    original_count = line_count(text)
    rows: _Rows = [(i, line) for i, line in enumerate(split_lines(text), 1)]
    outcomes: list[EditOutcome] = []
    for idx, edit in enumerate(script.edits):
        try:
            rows = _apply_one(rows, edit, original_count)
        except MarkerNotFound as err:
            if not lenient:
                raise
            outcomes.append(EditOutcome(idx, "skipped", str(err)))
            continue
        outcomes.append(EditOutcome(idx, "applied"))
    result = "\n".join(content for _, content in rows)
    applied = sum(1 for o in outcomes if o.status == "applied")
    report = ApplyReport(
        applied_count=applied,
        skipped_count=len(outcomes) - applied,
        outcomes=tuple(outcomes),
        result_line_count=line_count(result),
    )
    return result, report


def edit_to_wire(edit: Edit, part: str) -> dict:
    obj = {"type": edit.kind, "part": part, "fromLine": edit.from_line, "toLine": edit.to_line}
    if edit.content is not None:
        obj["content"] = edit.content
    return obj


def script_to_wire(script: EditScript) -> list[dict]:
    return [edit_to_wire(e, script.part) for e in script.edits]


def scripts_from_wire(items: list[dict]) -> list[EditScript]:
    """Group flat wire edit objects into one EditScript per part, preserving order."""
    by_part: dict[str, list[Edit]] = {}
    order: list[str] = []
    for obj in items:
        part = obj["part"]
        if part not in by_part:
            by_part[part] = []
            order.append(part)
        by_part[part].append(
            Edit(
                kind=obj["type"],
                from_line=int(obj["fromLine"]),
                to_line=int(obj["toLine"]),
                content=obj.get("content"),
            )
        )
    return [EditScript(part=p, edits=tuple(by_part[p])) for p in order]
