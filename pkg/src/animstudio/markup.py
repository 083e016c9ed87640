"""Tolerant markup parser on top of html.parser, plus a canonical pretty-printer.

The tree keeps elements, text and comments with source offsets. style and
script elements are parsed as raw-text containers (html.parser CDATA mode),
so their content is never re-interpreted as markup.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from html import escape
from html.parser import HTMLParser

VOID_ELEMENTS = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
}

RAW_TEXT_ELEMENTS = {"style", "script"}


@dataclass
class MarkupText:
    data: str
    offset: int = 0


@dataclass
class MarkupComment:
    data: str
    offset: int = 0


@dataclass
class MarkupElement:
    tag: str
    attrs: list[tuple[str, str | None]] = field(default_factory=list)
    children: list = field(default_factory=list)
    offset: int = 0


@dataclass
class MarkupTree:
    children: list = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def find_all(self, tag: str) -> list[MarkupElement]:
        found: list[MarkupElement] = []

        def walk(nodes):
            for node in nodes:
                if isinstance(node, MarkupElement):
                    if node.tag == tag:
                        found.append(node)
                    walk(node.children)

        walk(self.children)
        return found

    def style_containers(self) -> list[MarkupElement]:
        return self.find_all("style")

    def script_containers(self) -> list[MarkupElement]:
        return self.find_all("script")


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.tree = MarkupTree()
        self.stack: list[MarkupElement] = []

    def _offset(self) -> int:
        line, col = self.getpos()
        return self._line_starts[line - 1] + col if line - 1 < len(self._line_starts) else 0

    def feed_text(self, text: str) -> MarkupTree:
        starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                starts.append(i + 1)
        self._line_starts = starts
        self.feed(text)
        self.close()
        if self.stack:
            self.tree.errors.append(
                "unclosed elements: " + ", ".join(e.tag for e in self.stack)
            )
        return self.tree

    def _append(self, node) -> None:
        (self.stack[-1].children if self.stack else self.tree.children).append(node)

    def handle_starttag(self, tag, attrs):
        element = MarkupElement(tag=tag, attrs=list(attrs), offset=self._offset())
        self._append(element)
        if tag not in VOID_ELEMENTS:
            self.stack.append(element)

    def handle_startendtag(self, tag, attrs):
        self._append(MarkupElement(tag=tag, attrs=list(attrs), offset=self._offset()))

    def handle_endtag(self, tag):
        for i in range(len(self.stack) - 1, -1, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        self.tree.errors.append(f"stray closing tag </{tag}>")

    def handle_data(self, data):
        self._append(MarkupText(data=data, offset=self._offset()))

    def handle_comment(self, data):
        self._append(MarkupComment(data=data, offset=self._offset()))


def parse_markup(text: str) -> MarkupTree:
    return _TreeBuilder().feed_text(text)


def _collapse(text: str) -> str:
    return " ".join(text.split())


def _serialize_attrs(attrs: list[tuple[str, str | None]]) -> str:
    chunks = []
    for name, value in attrs:
        if value is None:
            chunks.append(name)
        else:
            chunks.append(f'{name}="{escape(value, quote=True)}"')
    return (" " + " ".join(chunks)) if chunks else ""


def _serialize_node(node, depth: int, out: list[str]) -> None:
    pad = "  " * depth
    if isinstance(node, MarkupText):
        text = _collapse(node.data)
        if text:
            out.append(pad + escape(text, quote=False))
        return
    if isinstance(node, MarkupComment):
        out.append(f"{pad}<!--{node.data}-->")
        return
    if node.tag in VOID_ELEMENTS:
        out.append(f"{pad}<{node.tag}{_serialize_attrs(node.attrs)}>")
        return
    if node.tag in RAW_TEXT_ELEMENTS:
        content = "".join(c.data for c in node.children if isinstance(c, MarkupText))
        lines = content.split("\n")
        while lines and not lines[0].strip():
            lines.pop(0)
        while lines and not lines[-1].strip():
            lines.pop()
        out.append(f"{pad}<{node.tag}{_serialize_attrs(node.attrs)}>")
        out.extend(lines)
        out.append(f"{pad}</{node.tag}>")
        return
    open_tag = f"<{node.tag}{_serialize_attrs(node.attrs)}>"
    meaningful = [
        c
        for c in node.children
        if not (isinstance(c, MarkupText) and not c.data.strip())
    ]
    if not meaningful:
        out.append(f"{pad}{open_tag}</{node.tag}>")
        return
    # Single short text child stays inline: <span>hi</span>
    if len(meaningful) == 1 and isinstance(meaningful[0], MarkupText):
        text = escape(_collapse(meaningful[0].data), quote=False)
        if len(text) <= 60:
            out.append(f"{pad}{open_tag}{text}</{node.tag}>")
            return
    out.append(pad + open_tag)
    for child in meaningful:
        _serialize_node(child, depth + 1, out)
    out.append(f"{pad}</{node.tag}>")


def serialize_markup(tree: MarkupTree) -> str:
    meaningful = [
        n
        for n in tree.children
        if not (isinstance(n, MarkupText) and not n.data.strip())
    ]
    if not meaningful:
        return ""
    out: list[str] = []
    for node in meaningful:
        _serialize_node(node, 0, out)
    return "\n".join(out) + "\n"


def format_markup_text(text: str) -> str:
    return serialize_markup(parse_markup(text))


def node_signature(node):
    """Formatting-independent structure: whitespace-collapsed text, ordered attrs."""
    if isinstance(node, MarkupText):
        collapsed = _collapse(node.data)
        return ("text", collapsed) if collapsed else None
    if isinstance(node, MarkupComment):
        return ("comment", node.data.strip())
    if node.tag in RAW_TEXT_ELEMENTS:
        content = "".join(c.data for c in node.children if isinstance(c, MarkupText))
        return ("rawtext", node.tag, tuple(node.attrs), content.strip())
    children = tuple(
        sig for sig in (node_signature(c) for c in node.children) if sig is not None
    )
    return ("element", node.tag, tuple(node.attrs), children)


def tree_signature(tree: MarkupTree):
    return tuple(
        sig for sig in (node_signature(n) for n in tree.children) if sig is not None
    )
