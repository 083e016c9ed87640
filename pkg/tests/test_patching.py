import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from animstudio.patching import (
    Edit,
    EditScript,
    EditScriptInvalid,
    MalformedMarker,
    MarkerNotFound,
    apply_edits,
    line_count,
    mark_lines,
    strip_markers,
    validate_script,
)


# ---------------------------------------------------------------------------
# Independent oracle: sort edits by fromLine descending, splice the raw line
# array. Stays deliberately dumb and separate from the marker machinery.
# ---------------------------------------------------------------------------

def splice_oracle(text: str, script: EditScript) -> str:
    lines = [] if text == "" else text.split("\n")

    def content_lines(content):
        if not content:
            return []
        parts = content.split("\n")
        if parts and parts[-1] == "":
            parts.pop()
        return parts

    for e in sorted(script.edits, key=lambda e: e.from_line, reverse=True):
        if e.kind == "insert":
            lines[e.from_line - 1 : e.from_line - 1] = content_lines(e.content)
        elif e.kind == "remove":
            del lines[e.from_line - 1 : e.to_line]
        else:
            lines[e.from_line - 1 : e.to_line] = content_lines(e.content)
    return "\n".join(lines)


def random_text(rng: random.Random, max_lines: int = 300) -> str:
    n = rng.randint(0, max_lines)
    if n == 0:
        return ""
    alphabet = "abcdefghij {};:()|#."
    return "\n".join(
        "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12))) for _ in range(n)
    )


def random_valid_script(rng: random.Random, n_lines: int, max_edits: int = 12) -> EditScript:
    """Build a script guaranteed valid: disjoint ranges, distinct insert points
    outside every range."""
    edits = []
    taken_lines: set[int] = set()
    insert_points: set[int] = set()
    for _ in range(rng.randint(0, max_edits)):
        kind = rng.choice(("insert", "remove", "update"))
        content = "\n".join("new" + str(rng.randint(0, 99)) for _ in range(rng.randint(1, 3)))
        if kind == "insert":
            candidates = [
                p
                for p in range(1, n_lines + 2)
                if p not in taken_lines and p not in insert_points
            ]
            if not candidates:
                continue
            p = rng.choice(candidates)
            insert_points.add(p)
            edits.append(Edit("insert", p, p, content))
        else:
            if n_lines == 0:
                continue
            start = rng.randint(1, n_lines)
            end = min(n_lines, start + rng.randint(0, 4))
            span = set(range(start, end + 1))
            if span & taken_lines or span & insert_points:
                continue
            taken_lines |= span
            if kind == "remove":
                edits.append(Edit("remove", start, end))
            else:
                edits.append(Edit("update", start, end, content))
    return EditScript(part="style", edits=tuple(edits))


# ---------------------------------------------------------------------------
# Marking
# ---------------------------------------------------------------------------

def test_mark_lines_format():
    assert mark_lines("a\nb").marked == "(1) | a\n(2) | b"


def test_mark_empty():
    assert mark_lines("").marked == ""
    assert strip_markers("") == ""


def test_strip_single_line():
    assert strip_markers("(1) | x") == "x"


def test_strip_rejects_unmarked():
    with pytest.raises(MalformedMarker):
        strip_markers("no marker here")


def test_marker_numbers_strictly_increasing():
    marked = mark_lines("x\ny\nz").marked.split("\n")
    numbers = [int(line.split(")")[0][1:]) for line in marked]
    assert numbers == [1, 2, 3]


@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=400))
def test_mark_strip_roundtrip(text):
    text = text.replace("\r", "")
    assert strip_markers(mark_lines(text)) == text


def test_roundtrip_preserves_leading_spaces_and_empty_lines():
    text = "  indented\n\nplain\n"
    assert strip_markers(mark_lines(text)) == text


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def test_validate_overlap():
    script = EditScript(
        "style",
        (Edit("update", 2, 3, "x"), Edit("remove", 3, 4)),
    )
    codes = [v.code for v in validate_script(script, 10)]
    assert "overlap" in codes


def test_validate_eof_insert_allowed():
    script = EditScript("style", (Edit("insert", 11, 11, "x"),))
    assert validate_script(script, 10) == []


def test_validate_inverted_range():
    script = EditScript("style", (Edit("update", 5, 4, "x"),))
    codes = [v.code for v in validate_script(script, 10)]
    assert codes == ["inverted-range"]


def test_validate_insert_inside_update_rejected():
    script = EditScript(
        "style",
        (Edit("insert", 1, 1, "x"), Edit("update", 1, 1, "A")),
    )
    codes = [v.code for v in validate_script(script, 2)]
    assert "overlap" in codes


def test_validate_insert_touching_after_range_ok():
    script = EditScript(
        "style",
        (Edit("update", 1, 2, "A"), Edit("insert", 3, 3, "x")),
    )
    assert validate_script(script, 5) == []


def test_validate_duplicate_insert_point():
    script = EditScript(
        "style",
        (Edit("insert", 2, 2, "x"), Edit("insert", 2, 2, "y")),
    )
    codes = [v.code for v in validate_script(script, 5)]
    assert "duplicate-insert-point" in codes


def test_validate_insert_span_and_range_bounds():
    assert [v.code for v in validate_script(EditScript("style", (Edit("insert", 1, 2, "x"),)), 5)] == ["insert-span"]
    assert [v.code for v in validate_script(EditScript("style", (Edit("remove", 4, 7),)), 5)] == ["out-of-range"]
    assert [v.code for v in validate_script(EditScript("style", (Edit("remove", 1, 1, "junk"),)), 5)] == [
        "unexpected-content"
    ]


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def test_update_middle_line():
    out, report = apply_edits("a\nb\nc", EditScript("style", (Edit("update", 2, 2, "B"),)))
    assert out == "a\nB\nc"
    assert report.applied_count == 1


def test_empty_script_identity():
    out, report = apply_edits("a\nb", EditScript("style", ()))
    assert out == "a\nb"
    assert report.applied_count == 0


def test_remove_all_lines_yields_empty():
    out, _ = apply_edits("a\nb\nc", EditScript("style", (Edit("remove", 1, 3),)))
    assert out == ""


def test_insert_into_empty_text():
    out, _ = apply_edits("", EditScript("style", (Edit("insert", 1, 1, "hello"),)))
    assert out == "hello"


def test_conflicting_script_refused_whole():
    script = EditScript("style", (Edit("insert", 1, 1, "x"), Edit("update", 1, 1, "A")))
    with pytest.raises(EditScriptInvalid):
        apply_edits("a\nb", script)


def test_multiline_content_spliced_as_lines():
    out, _ = apply_edits("a\nb", EditScript("style", (Edit("update", 1, 1, "x\ny\n"),)))
    assert out == "x\ny\nb"


def test_marker_not_found_defensive():
    # Bypassing validation lets a stale script reference a line that never existed.
    script = EditScript("style", (Edit("update", 9, 9, "x"),))
    with pytest.raises(MarkerNotFound):
        apply_edits("a\nb", script, validate=False)
    out, report = apply_edits("a\nb", script, validate=False, lenient=True)
    assert out == "a\nb"
    assert report.skipped_count == 1
    assert report.applied_count + report.skipped_count == len(script.edits)


def test_no_marker_leakage_with_markerlike_content():
    # Inserted content that *looks* like a marker must survive untouched and
    # must not confuse later edits.
    script = EditScript(
        "style",
        (Edit("insert", 2, 2, "(1) | fake"), Edit("update", 3, 3, "C")),
    )
    out, _ = apply_edits("a\nb\nc", script)
    assert out == "a\n(1) | fake\nb\nC"


def test_adjacent_edits_do_not_corrupt():
    text = "l1\nl2\nl3\nl4"
    script = EditScript(
        "style",
        (
            Edit("update", 2, 2, "L2"),
            Edit("remove", 3, 3),
            Edit("insert", 4, 4, "mid"),
        ),
    )
    out, _ = apply_edits(text, script)
    assert out == splice_oracle(text, script)
    assert out == "l1\nL2\nmid\nl4"


def test_oracle_equivalence_randomized():
    rng = random.Random(20240501)
    for _ in range(300):
        text = random_text(rng, max_lines=60)
        script = random_valid_script(rng, line_count(text))
        out, _ = apply_edits(text, script)
        assert out == splice_oracle(text, script)


def test_order_independence_permutations():
    rng = random.Random(7)
    for _ in range(80):
        text = random_text(rng, max_lines=12)
        script = random_valid_script(rng, line_count(text), max_edits=4)
        if len(script.edits) < 2:
            continue
        results = set()
        for perm in itertools.permutations(script.edits):
            out, _ = apply_edits(text, EditScript(script.part, perm))
            results.add(out)
        assert len(results) == 1


@settings(max_examples=60)
@given(st.integers(0, 2**31 - 1))
def test_oracle_equivalence_property(seed):
    rng = random.Random(seed)
    text = random_text(rng, max_lines=40)
    script = random_valid_script(rng, line_count(text))
    out, _ = apply_edits(text, script)
    assert out == splice_oracle(text, script)
