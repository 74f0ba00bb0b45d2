"""Parse, represent and serialize HTML/XML exercise documents.

Documents are immutable-by-convention trees of :class:`Element`, :class:`Text`,
:class:`Comment` and :class:`ProcessingInstruction` nodes.  XML parsing is
strict (expat); HTML parsing is lenient for a fixed list of void elements and
for unclosed ``p``/``li``.  Serialization is canonical: attribute order
preserved, ``& < >`` escaped in text, additionally ``"`` in attribute values,
empty elements written self-closing.
"""

from __future__ import annotations

import html.parser
import xml.parsers.expat
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Union

VOID_ELEMENTS = frozenset({"br", "img", "hr", "input", "meta", "link"})

# elements that may be left unclosed in lenient html mode
AUTO_CLOSE = frozenset({"p", "li"})


class MalformedMarkup(ValueError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class Text:
    content: str


@dataclass(frozen=True)
class Comment:
    content: str


@dataclass(frozen=True)
class ProcessingInstruction:
    target: str
    data: str


@dataclass(frozen=True)
class Element:
    name: str
    attributes: tuple[tuple[str, str], ...] = ()
    children: tuple["MarkupNode", ...] = ()

    def get_attribute(self, name: str) -> Optional[str]:
        for k, v in self.attributes:
            if k == name:
                return v
        return None


MarkupNode = Union[Element, Text, Comment, ProcessingInstruction]

NodePath = tuple[int, ...]


@dataclass(frozen=True)
class MarkupDocument:
    root: Element
    format: str  # "xml" | "html"
    declared_encoding: Optional[str] = None


def resolve_path(doc: MarkupDocument, path: NodePath) -> MarkupNode:
    """Resolve a child-index path from the root; raise KeyError if stale."""
    node: MarkupNode = doc.root
    for i in path:
        if not isinstance(node, Element) or i >= len(node.children):
            raise KeyError(f"path {path} does not resolve")
        node = node.children[i]
    return node


def iter_nodes(doc: MarkupDocument) -> Iterator[tuple[NodePath, MarkupNode]]:
    stack: list[tuple[NodePath, MarkupNode]] = [((), doc.root)]
    while stack:
        path, node = stack.pop()
        yield path, node
        if isinstance(node, Element):
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((path + (i,), node.children[i]))


# ---------------------------------------------------------------------------
# parsing


class _XmlBuilder:
    def __init__(self) -> None:
        self.stack: list[tuple[str, tuple[tuple[str, str], ...], list]] = []
        self.root: Optional[Element] = None
        self.declared_encoding: Optional[str] = None
        self._text: list[str] = []

    def _flush_text(self) -> None:
        if self._text and self.stack:
            self.stack[-1][2].append(Text("".join(self._text)))
        self._text.clear()

    def xml_decl(self, version, encoding, standalone) -> None:
        self.declared_encoding = encoding

    def start(self, name: str, attrs: list[str]) -> None:
        self._flush_text()
        pairs = tuple(zip(attrs[0::2], attrs[1::2]))
        self.stack.append((name, pairs, []))

    def end(self, name: str) -> None:
        self._flush_text()
        tagname, attrs, children = self.stack.pop()
        elem = Element(tagname, attrs, tuple(children))
        if self.stack:
            self.stack[-1][2].append(elem)
        else:
            self.root = elem

    def chardata(self, data: str) -> None:
        if self.stack:
            self._text.append(data)

    def comment(self, data: str) -> None:
        self._flush_text()
        if self.stack:
            self.stack[-1][2].append(Comment(data))

    def pi(self, target: str, data: str) -> None:
        self._flush_text()
        if self.stack:
            self.stack[-1][2].append(ProcessingInstruction(target, data))


def _parse_xml(text: str) -> tuple[Element, Optional[str]]:
    builder = _XmlBuilder()
    parser = xml.parsers.expat.ParserCreate()
    parser.ordered_attributes = True
    parser.XmlDeclHandler = builder.xml_decl
    parser.StartElementHandler = builder.start
    parser.EndElementHandler = builder.end
    parser.CharacterDataHandler = builder.chardata
    parser.CommentHandler = builder.comment
    parser.ProcessingInstructionHandler = builder.pi
    try:
        parser.Parse(text, True)
    except xml.parsers.expat.ExpatError as exc:
        raise MalformedMarkup(
            exc.lineno, exc.offset, xml.parsers.expat.errors.messages[exc.code]
        ) from exc
    if builder.root is None:
        raise MalformedMarkup(1, 0, "no root element")
    return builder.root, builder.declared_encoding


class _HtmlBuilder(html.parser.HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.stack: list[tuple[str, tuple[tuple[str, str], ...], list]] = []
        self.top_level: list[MarkupNode] = []

    def _append(self, node: MarkupNode) -> None:
        if self.stack:
            self.stack[-1][2].append(node)
        else:
            self.top_level.append(node)

    def _close_top(self) -> None:
        name, attrs, children = self.stack.pop()
        self._append(Element(name, attrs, tuple(children)))

    def handle_starttag(self, tag, attrs):
        # a new <p> implicitly closes an open <p>; <li> closes an open <li>
        if tag in AUTO_CLOSE and any(open_tag == tag for open_tag, _, _ in self.stack):
            while self.stack and self.stack[-1][0] in AUTO_CLOSE:
                top = self.stack[-1][0]
                self._close_top()
                if top == tag:
                    break
        pairs = tuple((k, v if v is not None else "") for k, v in attrs)
        if tag in VOID_ELEMENTS:
            self._append(Element(tag, pairs, ()))
        else:
            self.stack.append((tag, pairs, []))

    def handle_startendtag(self, tag, attrs):
        pairs = tuple((k, v if v is not None else "") for k, v in attrs)
        self._append(Element(tag, pairs, ()))

    def handle_endtag(self, tag):
        if tag in VOID_ELEMENTS:
            return
        open_names = [name for name, _, _ in self.stack]
        if tag not in open_names:
            line, col = self.getpos()
            raise MalformedMarkup(line, col, f"unmatched end tag </{tag}>")
        while self.stack:
            top = self.stack[-1][0]
            if top != tag and top not in AUTO_CLOSE:
                line, col = self.getpos()
                raise MalformedMarkup(line, col, f"misnested end tag </{tag}>")
            self._close_top()
            if top == tag:
                break

    def handle_data(self, data):
        self._append(Text(data))

    def handle_comment(self, data):
        self._append(Comment(data))

    def handle_pi(self, data):
        target, _, rest = data.partition(" ")
        self._append(ProcessingInstruction(target, rest))

    def finish(self) -> Element:
        while self.stack and self.stack[-1][0] in AUTO_CLOSE:
            self._close_top()
        if self.stack:
            line, col = self.getpos()
            raise MalformedMarkup(line, col, f"unclosed element <{self.stack[-1][0]}>")
        roots = [n for n in self.top_level if isinstance(n, Element)]
        stray = [
            n for n in self.top_level if isinstance(n, Text) and n.content.strip()
        ]
        if len(roots) != 1 or stray:
            raise MalformedMarkup(1, 0, "document must have a single root element")
        return roots[0]


def parse_document(data: bytes, format: str = "xml") -> MarkupDocument:
    """Parse raw bytes into a document tree.

    XML mode rejects ill-formed input with MalformedMarkup{line, column};
    HTML mode auto-closes void elements and unclosed p/li.  Only UTF-8
    input is accepted.
    """
    if format not in ("xml", "html"):
        raise ValueError(f"unknown format: {format!r}")
    try:
        text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    except UnicodeDecodeError as exc:
        raise DecodeError(str(exc)) from exc
    if format == "xml":
        root, encoding = _parse_xml(text)
        if encoding is not None and encoding.lower().replace("_", "-") != "utf-8":
            raise DecodeError(f"only UTF-8 supported, got {encoding!r}")
        doc = MarkupDocument(root=root, format="xml", declared_encoding=encoding)
    else:
        builder = _HtmlBuilder()
        builder.feed(text)
        builder.close()
        doc = MarkupDocument(root=builder.finish(), format="html")
    return canonicalize(doc)


# ---------------------------------------------------------------------------
# serialization


def _escape_text(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(s: str) -> str:
    return _escape_text(s).replace('"', "&quot;")


def _write(node: MarkupNode, out: list[str]) -> None:
    if isinstance(node, Text):
        out.append(_escape_text(node.content))
    elif isinstance(node, Comment):
        out.append(f"<!--{node.content}-->")
    elif isinstance(node, ProcessingInstruction):
        body = f"{node.target} {node.data}" if node.data else node.target
        out.append(f"<?{body}?>")
    else:
        attrs = "".join(f' {k}="{_escape_attr(v)}"' for k, v in node.attributes)
        if node.children:
            out.append(f"<{node.name}{attrs}>")
            for child in node.children:
                _write(child, out)
            out.append(f"</{node.name}>")
        else:
            out.append(f"<{node.name}{attrs}/>")


def serialize_document(doc: MarkupDocument) -> bytes:
    out: list[str] = []
    _write(doc.root, out)
    return "".join(out).encode("utf-8")


# ---------------------------------------------------------------------------
# canonicalization


def _merge_text(children: tuple[MarkupNode, ...]) -> tuple[MarkupNode, ...]:
    merged: list[MarkupNode] = []
    for child in children:
        if isinstance(child, Element):
            child = Element(child.name, child.attributes, _merge_text(child.children))
        if (
            isinstance(child, Text)
            and merged
            and isinstance(merged[-1], Text)
        ):
            merged[-1] = Text(merged[-1].content + child.content)
        else:
            merged.append(child)
    return tuple(merged)


def canonicalize(doc: MarkupDocument) -> MarkupDocument:
    """Merge adjacent text nodes throughout the tree.  Idempotent."""
    root = Element(doc.root.name, doc.root.attributes, _merge_text(doc.root.children))
    return replace(doc, root=root)


def text_content(node: MarkupNode) -> str:
    """Concatenated text of the subtree (comments and PIs excluded)."""
    if isinstance(node, Text):
        return node.content
    if isinstance(node, Element):
        return "".join(text_content(c) for c in node.children)
    return ""


def replace_node(doc: MarkupDocument, path: NodePath, new: MarkupNode) -> MarkupDocument:
    """Return a new document with the node at `path` replaced."""

    def rebuild(node: MarkupNode, rest: NodePath) -> MarkupNode:
        if not rest:
            return new
        assert isinstance(node, Element)
        i = rest[0]
        children = list(node.children)
        children[i] = rebuild(children[i], rest[1:])
        return Element(node.name, node.attributes, tuple(children))

    root = rebuild(doc.root, path)
    assert isinstance(root, Element)
    return replace(doc, root=root)
