"""A small, tolerant HTML DOM on top of ``html.parser``.

Third-party HTML libraries are deliberately avoided; WordPress markup
(and the fragments its REST API returns) is simple enough that the
stdlib parser plus a forgiving tree builder covers it. Malformed
markup never raises: stray end tags are ignored and unclosed elements
are closed implicitly.

Selectors support the subset needed by extraction configs:

* tag names, ``.class``, ``#id``, ``[attr]``, ``[attr=value]``
  (quoted or bare values), combined into compound simple selectors
  (``a.btn[hreflang]``);
* the descendant combinator (whitespace);
* comma-separated selector groups.

Child/sibling combinators and pseudo-classes are not implemented.
"""

from __future__ import annotations

import re
from html.parser import HTMLParser

VOID_TAGS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

# Elements that implicitly close an open element of the same group.
_AUTOCLOSE = {
    "p": {"p"},
    "li": {"li"},
    "option": {"option"},
    "tr": {"tr"},
    "td": {"td", "th"},
    "th": {"td", "th"},
}


class Element:
    """An element node; children are ``Element`` or ``str`` (text)."""

    __slots__ = ("tag", "attrs", "children", "parent")

    def __init__(self, tag: str, attrs: dict[str, str] | None = None):
        self.tag = tag
        self.attrs: dict[str, str] = attrs or {}
        self.children: list[Element | str] = []
        self.parent: Element | None = None

    def __repr__(self) -> str:
        return f"<Element {self.tag} {self.attrs!r}>"

    def append(self, node: "Element | str") -> None:
        if isinstance(node, Element):
            node.parent = self
        self.children.append(node)

    def iter(self):
        """Depth-first iteration over descendant elements (self excluded)."""
        stack = [c for c in reversed(self.children) if isinstance(c, Element)]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(c for c in reversed(node.children) if isinstance(c, Element))

    @property
    def classes(self) -> list[str]:
        return self.attrs.get("class", "").split()

    @property
    def text(self) -> str:
        """Concatenated descendant text (no normalization)."""
        parts: list[str] = []
        stack: list[Element | str] = list(reversed(self.children))
        while stack:
            node = stack.pop()
            if isinstance(node, str):
                parts.append(node)
            else:
                stack.extend(reversed(node.children))
        return "".join(parts)

    def detach(self) -> None:
        """Remove this element from its parent."""
        if self.parent is not None:
            self.parent.children = [c for c in self.parent.children if c is not self]
            self.parent = None

    def select(self, selector: str) -> list["Element"]:
        """All descendant elements matching a selector group, in document order."""
        chains = [_parse_chain(part) for part in selector.split(",") if part.strip()]
        found: list[Element] = []
        seen: set[int] = set()
        for node in self.iter():
            if id(node) in seen:
                continue
            if any(_matches_chain(node, chain, self) for chain in chains):
                seen.add(id(node))
                found.append(node)
        return found

    def select_one(self, selector: str) -> "Element | None":
        hits = self.select(selector)
        return hits[0] if hits else None


_SIMPLE_RE = re.compile(
    r"""(?P<tag>[a-zA-Z][\w-]*|\*)?
        (?P<rest>(?:[.#][\w-]+|\[[^\]]+\])*)$""",
    re.VERBOSE,
)
_PIECE_RE = re.compile(r"[.#][\w-]+|\[[^\]]+\]")


class Simple:
    """One compound simple selector (tag/classes/id/attributes)."""

    __slots__ = ("tag", "sel_id", "classes", "attrs")

    def __init__(self, text: str):
        m = _SIMPLE_RE.match(text)
        if not m or (not m.group("tag") and not m.group("rest")):
            raise ValueError(f"unsupported selector: {text!r}")
        tag = m.group("tag")
        self.tag = None if tag in (None, "*") else tag.lower()
        self.sel_id: str | None = None
        self.classes: list[str] = []
        self.attrs: list[tuple[str, str | None]] = []
        for piece in _PIECE_RE.findall(m.group("rest") or ""):
            if piece.startswith("."):
                self.classes.append(piece[1:])
            elif piece.startswith("#"):
                self.sel_id = piece[1:]
            else:
                body = piece[1:-1].strip()
                if "=" in body:
                    name, value = body.split("=", 1)
                    self.attrs.append((name.strip().lower(), value.strip().strip("'\"")))
                else:
                    self.attrs.append((body.lower(), None))

    def matches(self, node: Element) -> bool:
        if self.tag is not None and node.tag != self.tag:
            return False
        if self.sel_id is not None and node.attrs.get("id") != self.sel_id:
            return False
        if any(cls not in node.classes for cls in self.classes):
            return False
        for name, value in self.attrs:
            if name not in node.attrs:
                return False
            if value is not None and node.attrs[name] != value:
                return False
        return True


def _parse_chain(text: str) -> list[Simple]:
    parts = text.split()
    if not parts:
        raise ValueError("empty selector")
    return [Simple(p) for p in parts]


def _matches_chain(node: Element, chain: list[Simple], root: Element) -> bool:
    if not chain[-1].matches(node):
        return False
    idx = len(chain) - 2
    cur = node.parent
    while idx >= 0:
        while cur is not None and cur is not root and not chain[idx].matches(cur):
            cur = cur.parent
        if cur is None or cur is root:
            return False
        idx -= 1
        cur = cur.parent
    return True


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = Element("[document]")
        self.stack = [self.root]

    def handle_starttag(self, tag: str, attrs) -> None:
        closers = _AUTOCLOSE.get(tag)
        if closers and self.stack[-1].tag in closers:
            self.stack.pop()
        node = Element(tag, {k: (v if v is not None else "") for k, v in attrs})
        self.stack[-1].append(node)
        if tag not in VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag: str, attrs) -> None:
        node = Element(tag, {k: (v if v is not None else "") for k, v in attrs})
        self.stack[-1].append(node)

    def handle_endtag(self, tag: str) -> None:
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # Stray end tag: ignore.

    def handle_data(self, data: str) -> None:
        if data:
            self.stack[-1].append(data)


def parse_html(markup: str) -> Element:
    """Parse markup (document or fragment) into a tree; never raises."""
    builder = _TreeBuilder()
    builder.feed(markup)
    builder.close()
    return builder.root


_WS_RE = re.compile(r"\s+")


def squash_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces and strip the ends."""
    return _WS_RE.sub(" ", text).strip()
