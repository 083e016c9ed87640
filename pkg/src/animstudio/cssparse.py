"""Tolerant stylesheet parser and canonical serializer.

The grammar is deliberately looser than real CSS: declarations may
appear at the top level (orphans), qualified rules may appear inside
other rules' blocks, and unclassifiable runs are kept as Raw items
instead of being dropped. Repairs and the semantic diff both work on
this tree; nothing here deletes content.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

Span = tuple[int, int]

_IDENT_RE = re.compile(r"^--?[A-Za-z_][\w-]*$|^[A-Za-z_][\w-]*$")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Declaration:
    prop: str
    value: str
    span: Span = (0, 0)


@dataclass(frozen=True)
class Comment:
    text: str  # inner text, without the /* */ delimiters
    span: Span = (0, 0)


@dataclass(frozen=True)
class Raw:
    text: str
    span: Span = (0, 0)


@dataclass(frozen=True)
class QualifiedRule:
    selector: str
    items: tuple = ()
    span: Span = (0, 0)


@dataclass(frozen=True)
class AtRule:
    name: str
    prelude: str
    items: tuple | None = None  # None when terminated by ';'
    span: Span = (0, 0)


@dataclass
class Stylesheet:
    items: list = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def collapse_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces, leaving string literals intact."""
    out: list[str] = []
    i = 0
    n = len(text)
    pending_space = False
    while i < n:
        ch = text[i]
        if ch in "\"'":
            if pending_space and out:
                out.append(" ")
            pending_space = False
            quote = ch
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == quote:
                    j += 1
                    break
                j += 1
            out.append(text[i:j])
            i = j
            continue
        if ch.isspace():
            pending_space = True
            i += 1
            continue
        if pending_space and out:
            out.append(" ")
        pending_space = False
        out.append(ch)
        i += 1
    return "".join(out)


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.n = len(text)

    def eof(self) -> bool:
        return self.pos >= self.n

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < self.n else ""

    def skip_ws(self) -> None:
        while self.pos < self.n and self.text[self.pos].isspace():
            self.pos += 1

    def at_comment(self) -> bool:
        return self.text.startswith("/*", self.pos)

    def read_comment(self) -> Comment:
        start = self.pos
        end = self.text.find("*/", self.pos + 2)
        if end == -1:
            self.pos = self.n
            return Comment(self.text[start + 2 :].strip(), (start, self.n))
        self.pos = end + 2
        return Comment(self.text[start + 2 : end].strip(), (start, self.pos))

    def skip_string(self) -> None:
        quote = self.text[self.pos]
        self.pos += 1
        while self.pos < self.n:
            ch = self.text[self.pos]
            if ch == "\\":
                self.pos += 2
                continue
            self.pos += 1
            if ch == quote:
                return

    def scan_until(self, stops: str) -> tuple[str, str]:
        """Consume text (depth-aware for parens/brackets, skipping strings and
        comments) until one of `stops` at depth 0 or EOF. Returns (consumed,
        stop_char); the stop char itself is not consumed."""
        start = self.pos
        depth = 0
        while self.pos < self.n:
            ch = self.text[self.pos]
            if ch in "\"'":
                self.skip_string()
                continue
            if self.at_comment():
                self.read_comment()
                continue
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth = max(0, depth - 1)
            elif depth == 0 and ch in stops:
                return self.text[start : self.pos], ch
            self.pos += 1
        return self.text[start : self.pos], ""


def _split_declaration(prelude: str) -> tuple[str, str] | None:
    """Split at the first top-level colon; None when the text is not
    declaration-shaped (no colon, or a property that is not an identifier)."""
    depth = 0
    i = 0
    n = len(prelude)
    while i < n:
        ch = prelude[i]
        if ch in "\"'":
            quote = ch
            i += 1
            while i < n:
                if prelude[i] == "\\":
                    i += 2
                    continue
                if prelude[i] == quote:
                    i += 1
                    break
                i += 1
            continue
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth = max(0, depth - 1)
        elif ch == ":" and depth == 0:
            prop = prelude[:i].strip()
            value = prelude[i + 1 :].strip()
            if _IDENT_RE.match(prop) and value:
                return prop, value
            return None
        i += 1
    return None


def _parse_block(sc: _Scanner, sheet_errors: list[str]) -> tuple:
    """Parse items until the closing '}' of the current block or EOF."""
    items: list = []
    while True:
        sc.skip_ws()
        if sc.eof():
            sheet_errors.append("unclosed block at end of stylesheet")
            return tuple(items)
        if sc.peek() == "}":
            sc.pos += 1
            return tuple(items)
        item = _parse_item(sc, sheet_errors, top=False)
        if item is not None:
            items.append(item)


def _parse_item(sc: _Scanner, sheet_errors: list[str], top: bool):
    sc.skip_ws()
    if sc.eof():
        return None
    start = sc.pos
    if sc.at_comment():
        return sc.read_comment()
    if sc.peek() == "}":
        # Only reachable at top level; blocks consume their own '}'.
        sc.pos += 1
        sheet_errors.append(f"stray '}}' at offset {start}")
        return Raw("}", (start, sc.pos))
    if sc.peek() == "@":
        sc.pos += 1
        name_match = re.match(r"[\w-]+", sc.text[sc.pos :])
        name = name_match.group(0) if name_match else ""
        sc.pos += len(name)
        prelude, stop = sc.scan_until("{;}")
        if stop == "{":
            sc.pos += 1
            items = _parse_block(sc, sheet_errors)
            return AtRule(name, prelude.strip(), items, (start, sc.pos))
        if stop == ";":
            sc.pos += 1
        return AtRule(name, prelude.strip(), None, (start, sc.pos))

    prelude, stop = sc.scan_until("{;}")
    if stop == "{":
        sc.pos += 1
        items = _parse_block(sc, sheet_errors)
        return QualifiedRule(prelude.strip(), items, (start, sc.pos))
    if stop == ";":
        sc.pos += 1
    text = prelude.strip()
    if not text:
        return None
    decl = _split_declaration(text)
    if decl is not None:
        return Declaration(decl[0], decl[1], (start, sc.pos))
    return Raw(text, (start, sc.pos))


def parse_stylesheet(text: str) -> Stylesheet:
    sc = _Scanner(text)
    sheet = Stylesheet()
    while True:
        item = _parse_item(sc, sheet.errors, top=True)
        if item is None:
            if sc.eof():
                break
            continue
        sheet.items.append(item)
    return sheet


# ---------------------------------------------------------------------------
# Serialization (the canonical formatted form)
# ---------------------------------------------------------------------------

_INDENT = "  "


def _is_block_item(item) -> bool:
    return isinstance(item, QualifiedRule) or (isinstance(item, AtRule) and item.items is not None)


def _serialize_items(items, depth: int, out: list[str]) -> None:
    pad = _INDENT * depth
    previous_block = False
    for i, item in enumerate(items):
        if i > 0 and depth == 0 and (_is_block_item(item) or previous_block):
            out.append("")
        previous_block = _is_block_item(item)
        if isinstance(item, Declaration):
            out.append(f"{pad}{item.prop.strip()}: {collapse_ws(item.value)};")
        elif isinstance(item, Comment):
            out.append(f"{pad}/* {collapse_ws(item.text)} */" if item.text else f"{pad}/* */")
        elif isinstance(item, Raw):
            out.append(f"{pad}{collapse_ws(item.text)}")
        elif isinstance(item, QualifiedRule):
            selector = collapse_ws(item.selector)
            out.append(f"{pad}{selector} {{" if selector else f"{pad}{{")
            _serialize_items(item.items, depth + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(item, AtRule):
            head = f"@{item.name}"
            if item.prelude:
                head += f" {collapse_ws(item.prelude)}"
            if item.items is None:
                out.append(f"{pad}{head};")
            else:
                out.append(f"{pad}{head} {{")
                _serialize_items(item.items, depth + 1, out)
                out.append(f"{pad}}}")
        else:  # pragma: no cover - parser produces no other types
            raise TypeError(f"unknown stylesheet item: {item!r}")


def serialize_stylesheet(sheet: Stylesheet) -> str:
    if not sheet.items:
        return ""
    out: list[str] = []
    _serialize_items(sheet.items, 0, out)
    return "\n".join(out) + "\n"


def format_stylesheet_text(text: str) -> str:
    return serialize_stylesheet(parse_stylesheet(text))


# ---------------------------------------------------------------------------
# Structural signatures (formatting-independent equality)
# ---------------------------------------------------------------------------

def item_signature(item):
    if isinstance(item, Declaration):
        return ("decl", item.prop.strip().lower(), collapse_ws(item.value))
    if isinstance(item, Comment):
        return ("comment", collapse_ws(item.text))
    if isinstance(item, Raw):
        return ("raw", collapse_ws(item.text))
    if isinstance(item, QualifiedRule):
        return ("rule", collapse_ws(item.selector), tuple(item_signature(c) for c in item.items))
    if isinstance(item, AtRule):
        children = None if item.items is None else tuple(item_signature(c) for c in item.items)
        return ("at", item.name.lower(), collapse_ws(item.prelude), children)
    raise TypeError(f"unknown stylesheet item: {item!r}")


def sheet_signature(sheet: Stylesheet):
    return tuple(item_signature(i) for i in sheet.items)


def declaration_multiset(sheet: Stylesheet) -> dict[tuple[str, str], int]:
    """Multiset of (property, value) pairs over the whole tree; repairs must
    conserve it."""
    counts: dict[tuple[str, str], int] = {}

    def walk(items):
        for item in items:
            if isinstance(item, Declaration):
                key = (item.prop.strip().lower(), collapse_ws(item.value))
                counts[key] = counts.get(key, 0) + 1
            elif isinstance(item, QualifiedRule):
                walk(item.items)
            elif isinstance(item, AtRule) and item.items is not None:
                walk(item.items)

    walk(sheet.items)
    return counts


def replace_items(node, items: tuple):
    return replace(node, items=items)
