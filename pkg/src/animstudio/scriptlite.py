"""Lightweight script-part utilities.

Animations here are CSS-first; the script part gets a delimiter-balance
check, a brace-depth re-indenter, and a statement-shaped heuristic used
to recognize script text that leaked into the template. No real JS
parsing happens on purpose.
"""

from __future__ import annotations

import re

_STATEMENT_HEADS = (
    "const", "let", "var", "function", "class", "if", "for", "while", "do",
    "switch", "return", "import", "export", "async", "new", "try",
    "document", "window", "console", "setTimeout", "setInterval",
    "requestAnimationFrame", "addEventListener", "use strict",
)

_CALL_OR_ASSIGN_RE = re.compile(r"^[A-Za-z_$][\w$]*(\.[A-Za-z_$][\w$]*|\[[^\]]*\])*\s*[=(]")


def scan_line_depths(text: str) -> tuple[list[tuple[int, int]], list[str]]:
    """Per line: (depth before the line, depth delta), tracking strings,
    template literals and comments. Also returns balance errors."""
    errors: list[str] = []
    depths: list[tuple[int, int]] = []
    depth = 0
    state = ""  # "", "'", '"', "`", "//", "/*"
    for line in text.split("\n"):
        start_depth = depth
        i = 0
        if state == "//":
            state = ""
        while i < len(line):
            ch = line[i]
            if state in ("'", '"', "`"):
                if ch == "\\":
                    i += 2
                    continue
                if ch == state:
                    state = ""
                i += 1
                continue
            if state == "/*":
                if line.startswith("*/", i):
                    state = ""
                    i += 2
                    continue
                i += 1
                continue
            if ch in "'\"`":
                state = ch
            elif line.startswith("//", i):
                state = "//"
                break
            elif line.startswith("/*", i):
                state = "/*"
                i += 2
                continue
            elif ch in "{([":
                depth += 1
            elif ch in "})]":
                depth -= 1
                if depth < 0:
                    errors.append("unbalanced closing delimiter")
                    depth = 0
            i += 1
        if state in ("'", '"'):
            # Plain strings do not span lines.
            errors.append("unterminated string literal")
            state = ""
        depths.append((start_depth, depth - start_depth))
    if depth > 0:
        errors.append(f"{depth} unclosed delimiter(s) at end of script")
    if state == "/*":
        errors.append("unterminated block comment")
    return depths, errors


def parse_script(text: str) -> list[str]:
    """Returns a list of fatal-ish problems; empty list means the script is
    acceptable for bundling."""
    if not text.strip():
        return []
    _, errors = scan_line_depths(text)
    # Deduplicate while keeping order.
    seen: set[str] = set()
    out = []
    for e in errors:
        if e not in seen:
            seen.add(e)
            out.append(e)
    return out


def format_script(text: str) -> str:
    """Deterministic, idempotent re-indent by brace depth. Leaves content
    untouched apart from leading/trailing whitespace per line."""
    if not text.strip():
        return ""
    stripped_lines = [line.strip() for line in text.split("\n")]
    # Re-scan on the stripped text so indentation itself cannot affect depth.
    base = "\n".join(stripped_lines)
    depths, _ = scan_line_depths(base)
    out: list[str] = []
    for line, (start_depth, _) in zip(stripped_lines, depths):
        if not line:
            out.append("")
            continue
        depth = start_depth
        if line[0] in "})]":
            depth = max(0, depth - 1)
        out.append("  " * max(0, depth) + line)
    # Collapse runs of blank lines and trim the edges.
    collapsed: list[str] = []
    for line in out:
        if line == "" and (not collapsed or collapsed[-1] == ""):
            continue
        collapsed.append(line)
    while collapsed and collapsed[-1] == "":
        collapsed.pop()
    return "\n".join(collapsed) + "\n" if collapsed else ""


def looks_like_script(text: str) -> bool:
    """Heuristic: complete statement-shaped text, balanced, ending cleanly.
    Deliberately conservative so prose is never classified as code."""
    candidate = text.strip()
    if not candidate or len(candidate) < 4:
        return False
    _, errors = scan_line_depths(candidate)
    if errors:
        return False
    head = candidate.split(None, 1)[0]
    head = re.split(r"[^\w$.]", head, 1)[0]
    head_root = head.split(".", 1)[0]
    if head_root not in _STATEMENT_HEADS and not _CALL_OR_ASSIGN_RE.match(candidate):
        return False
    return candidate[-1] in ";})"
