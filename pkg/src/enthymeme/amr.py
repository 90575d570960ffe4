"""AMR graphs in PENMAN notation: parsing, validation and serialization.

Only the subset of PENMAN needed for logical translation is supported:
node declarations, role edges (including ``-of`` inverse roles),
constant targets and re-entrant variable references.  Metadata comment
lines (``# ::snt ...``) and alignment markers (``~e.3``) are ignored.

    >>> g = parse_penman("(w / want-01 :arg0 (b / boy))")
    >>> [str(e) for e in g.edges]
    ['arg0(w, b)']
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

__all__ = [
    "AmrError",
    "EmptyInput",
    "UnbalancedParens",
    "UndefinedVariable",
    "DuplicateVariable",
    "CycleDetected",
    "InvalidGraph",
    "Constant",
    "AmrNode",
    "AmrEdge",
    "AmrGraph",
    "Violation",
    "parse_penman",
    "parse_penman_many",
    "serialize_penman",
    "validate",
    "isomorphic",
]


class AmrError(ValueError):
    """Base class for malformed AMR input."""


class EmptyInput(AmrError):
    pass


class UnbalancedParens(AmrError):
    pass


class UndefinedVariable(AmrError):
    pass


class DuplicateVariable(AmrError):
    pass


class CycleDetected(AmrError):
    pass


class InvalidGraph(AmrError):
    """Raised when a constructed graph fails validation."""


@dataclass(frozen=True)
class Constant:
    """A literal edge target such as ``"York"``, ``5`` or ``imperative``."""

    value: str
    quoted: bool = False

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class AmrNode:
    variable: str
    concept: str
    negated: bool = False


@dataclass(frozen=True)
class AmrEdge:
    """A role relation.  ``source``/``target`` follow the normalized
    semantic direction; ``inverted`` records that the text used the
    ``-of`` form, i.e. the edge was written from ``target`` to ``source``."""

    role: str
    source: str
    target: Union[str, Constant]
    inverted: bool = False

    @property
    def is_constant(self) -> bool:
        return isinstance(self.target, Constant)

    @property
    def parent(self) -> str:
        """Variable the edge hangs under in the written tree."""
        return self.target if self.inverted else self.source  # type: ignore[return-value]

    @property
    def child(self) -> Union[str, Constant]:
        return self.source if self.inverted else self.target

    def __str__(self) -> str:
        return f"{self.role}({self.source}, {self.target})"


@dataclass(frozen=True)
class AmrGraph:
    root: str
    nodes: tuple[AmrNode, ...]
    edges: tuple[AmrEdge, ...]
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {n.variable: n for n in self.nodes})

    def node(self, variable: str) -> AmrNode:
        return self._index[variable]

    def __contains__(self, variable: object) -> bool:
        return variable in self._index

    def children(self, variable: str) -> list[AmrEdge]:
        """Edges written under ``variable``, in text order."""
        return [e for e in self.edges if e.parent == variable]

    def walk(self) -> Iterator[tuple[AmrEdge | None, str, bool]]:
        """Depth-first walk in written order.

        Yields ``(edge, variable, first_visit)``; the root comes first with
        ``edge=None``.  Constant targets are not yielded.
        """
        seen: set[str] = set()

        def visit(edge: AmrEdge | None, var: str) -> Iterator[tuple[AmrEdge | None, str, bool]]:
            first = var not in seen
            seen.add(var)
            yield edge, var, first
            if first:
                for e in self.children(var):
                    if not isinstance(e.child, Constant):
                        yield from visit(e, e.child)

        if self.root in self._index:
            yield from visit(None, self.root)


# -- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<slash>/)
  | (?P<role>:[^\s()"~/]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<symbol>[^\s()"/~:][^\s()"~]*)
  | (?P<align>~[^\s()]*)
  | (?P<ws>\s+)
    """,
    re.VERBOSE,
)

# Bare symbols of this shape are taken to be variables; anything else is a constant.
_VARIABLE_RE = re.compile(r"^[a-z]\d*$")

# Roles that end in "-of" but are not inverses.
_NON_INVERSE = {"consist-of", "prep-out-of", "prep-on-behalf-of"}


def _strip_comments(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if not line.lstrip().startswith("#"))


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:  # pragma: no cover - the symbol branch is total
            raise AmrError(f"unexpected character {text[pos]!r} at offset {pos}")
        pos = m.end()
        kind = m.lastgroup
        if kind in ("ws", "align"):
            continue
        tokens.append((kind, m.group()))
    return tokens


def normalize_role(role: str) -> tuple[str, bool]:
    """``":ARG0-of"`` -> ``("arg0", True)``."""
    role = role.lstrip(":").lower()
    if role.endswith("-of") and role not in _NON_INVERSE and len(role) > 3:
        return role[:-3], True
    return role, False


# -- parser ------------------------------------------------------------------


@dataclass
class _RawEdge:
    role: str
    inverted: bool
    parent: str
    child: Union[str, Constant, None]  # None until a bare symbol is resolved
    symbol: str | None = None


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.pos = 0
        self.nodes: list[AmrNode] = []
        self.edges: list[_RawEdge] = []
        self.negated: set[str] = set()

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind: str) -> str:
        tok = self.peek()
        if tok is None:
            raise UnbalancedParens("unexpected end of input")
        if tok[0] != kind:
            if kind == "rparen" or tok[0] == "rparen":
                raise UnbalancedParens(f"expected {kind}, found {tok[1]!r}")
            raise AmrError(f"expected {kind}, found {tok[1]!r}")
        self.pos += 1
        return tok[1]

    def parse_node(self) -> str:
        self.take("lparen")
        var = self.take("symbol")
        self.take("slash")
        tok = self.peek()
        if tok is None:
            raise UnbalancedParens("unexpected end of input")
        if tok[0] not in ("symbol", "string"):
            raise AmrError(f"node {var!r} has no concept")
        self.pos += 1
        concept = tok[1].strip('"')
        self.nodes.append(AmrNode(var, concept))
        while True:
            tok = self.peek()
            if tok is None:
                raise UnbalancedParens(f"node {var!r} is never closed")
            if tok[0] == "rparen":
                self.pos += 1
                return var
            if tok[0] != "role":
                raise AmrError(f"expected a role or ')', found {tok[1]!r}")
            self.pos += 1
            self.parse_edge(var, tok[1])

    def parse_edge(self, parent: str, raw_role: str) -> None:
        role, inverted = normalize_role(raw_role)
        tok = self.peek()
        if tok is None:
            raise UnbalancedParens("unexpected end of input after role")
        kind, text = tok
        if kind == "lparen":
            # reserve the slot first so edges stay in text order
            raw = _RawEdge(role, inverted, parent, None)
            self.edges.append(raw)
            raw.child = self.parse_node()
        elif kind == "string":
            self.pos += 1
            value = bytes(text[1:-1], "utf-8").decode("unicode_escape") if "\\" in text else text[1:-1]
            self.edges.append(_RawEdge(role, False, parent, Constant(value, quoted=True)))
        elif kind == "symbol":
            self.pos += 1
            if role == "polarity" and text == "-" and not inverted:
                self.negated.add(parent)
            else:
                self.edges.append(_RawEdge(role, inverted, parent, None, symbol=text))
        elif kind == "rparen":
            raise AmrError(f"role :{role} has no target")
        else:
            raise AmrError(f"unexpected {text!r} after role :{role}")


def parse_penman(text: str) -> AmrGraph:
    """Parse one PENMAN graph; raises an :class:`AmrError` subclass on bad input."""
    body = _strip_comments(text).strip()
    if not body:
        raise EmptyInput("no graph in input")
    tokens = _tokenize(body)
    depth = 0
    for kind, _ in tokens:
        depth += {"lparen": 1, "rparen": -1}.get(kind, 0)
        if depth < 0:
            raise UnbalancedParens("closing parenthesis without an opener")
    if depth != 0:
        raise UnbalancedParens(f"{depth} unclosed parenthesis(es)")

    p = _Parser(tokens)
    root = p.parse_node()
    if p.peek() is not None:
        raise AmrError(f"trailing input after graph: {p.peek()[1]!r}")  # type: ignore[index]

    declared: dict[str, AmrNode] = {}
    for n in p.nodes:
        if n.variable in declared:
            raise DuplicateVariable(f"variable {n.variable!r} declared twice")
        declared[n.variable] = n

    edges = []
    for raw in p.edges:
        child = raw.child
        inverted = raw.inverted
        role = raw.role
        if child is None:
            sym = raw.symbol or ""
            if sym in declared:
                child = sym
            elif _VARIABLE_RE.match(sym):
                raise UndefinedVariable(f"variable {sym!r} is referenced but never declared")
            else:
                child = Constant(sym)
        if isinstance(child, Constant):
            if inverted:  # an inverse role onto a constant has no meaning; keep it literal
                role, inverted = role + "-of", False
            edges.append(AmrEdge(role, raw.parent, child))
        elif inverted:
            edges.append(AmrEdge(role, child, raw.parent, inverted=True))
        else:
            edges.append(AmrEdge(role, raw.parent, child))

    nodes = tuple(AmrNode(n.variable, n.concept, n.variable in p.negated) for n in p.nodes)
    graph = AmrGraph(root, nodes, tuple(edges))
    violations = validate(graph)
    if violations:
        raise violations[0].as_error()
    return graph


def parse_penman_many(text: str) -> list[AmrGraph]:
    """Parse a file holding several graphs (blank-line or simply
    top-level-parenthesis separated)."""
    body = _strip_comments(text)
    graphs, depth, start = [], 0, None
    in_string = False
    for i, ch in enumerate(body):
        if ch == '"' and (i == 0 or body[i - 1] != "\\"):
            in_string = not in_string
        if in_string:
            continue
        if ch == "(":
            if depth == 0:
                start = i
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0 and start is not None:
                graphs.append(parse_penman(body[start : i + 1]))
                start = None
            elif depth < 0:
                raise UnbalancedParens("closing parenthesis without an opener")
    if depth != 0:
        raise UnbalancedParens("unterminated graph at end of input")
    return graphs


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str

    _ERRORS = {
        "UndefinedVariable": UndefinedVariable,
        "DuplicateVariable": DuplicateVariable,
        "CycleDetected": CycleDetected,
    }

    def as_error(self) -> AmrError:
        return self._ERRORS.get(self.rule, InvalidGraph)(f"{self.rule}: {self.subject}")

    def __str__(self) -> str:
        return f"{self.rule}: {self.subject}"


def validate(graph: AmrGraph) -> list[Violation]:
    """Check the structural invariants; an empty list means the graph is valid."""
    out: list[Violation] = []
    seen: set[str] = set()
    for n in graph.nodes:
        if n.variable in seen:
            out.append(Violation("DuplicateVariable", n.variable))
        seen.add(n.variable)
        if not n.concept:
            out.append(Violation("EmptyConcept", n.variable))
    if graph.root not in seen:
        out.append(Violation("MissingRoot", graph.root))

    adjacency: dict[str, list[str]] = {v: [] for v in seen}
    for e in graph.edges:
        ends = [e.source] if e.is_constant else [e.source, e.target]
        missing = [v for v in ends if v not in seen]
        for v in missing:
            out.append(Violation("UndefinedVariable", f"{v} in {e}"))
        if missing or e.is_constant:
            continue
        adjacency[e.parent].append(e.child)  # type: ignore[arg-type]
        if e.role != e.role.lower().lstrip(":") or not e.role:
            out.append(Violation("BadRole", str(e)))

    # cycles and reachability over the written (parent -> child) direction
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {v: WHITE for v in adjacency}
    cyclic: list[str] = []

    def dfs(v: str) -> None:
        colour[v] = GREY
        for w in adjacency[v]:
            if colour[w] == GREY:
                cyclic.append(f"{v} -> {w}")
            elif colour[w] == WHITE:
                dfs(w)
        colour[v] = BLACK

    if graph.root in adjacency:
        dfs(graph.root)
    for v in sorted(adjacency):
        if colour[v] == WHITE:
            out.append(Violation("Unreachable", v))
            dfs(v)
    out.extend(Violation("CycleDetected", c) for c in cyclic)
    return out


# -- serialization -----------------------------------------------------------


def _render_constant(c: Constant) -> str:
    if c.quoted or not c.value or re.search(r'[\s()":/~]', c.value):
        escaped = c.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return c.value


def serialize_penman(graph: AmrGraph, indent: int = 4) -> str:
    """Render ``graph`` as indented PENMAN text."""
    seen: set[str] = set()

    def render(var: str, level: int) -> str:
        seen.add(var)
        node = graph.node(var)
        parts = [f"({var} / {node.concept}"]
        pad = "\n" + " " * (indent * (level + 1))
        for e in graph.children(var):
            role = f":{e.role}-of" if e.inverted else f":{e.role}"
            child = e.child
            if isinstance(child, Constant):
                parts.append(f"{pad}{role} {_render_constant(child)}")
            elif child in seen:
                parts.append(f"{pad}{role} {child}")
            else:
                parts.append(f"{pad}{role} {render(child, level + 1)}")
        if node.negated:
            parts.append(f"{pad}:polarity -")
        return "".join(parts) + ")"

    return render(graph.root, 0)


def isomorphic(a: AmrGraph, b: AmrGraph) -> bool:
    """Same nodes and the same edge multiset, ignoring edge order.

    Variables are compared by name; parse/serialize round trips keep names.
    """
    from collections import Counter

    return (
        a.root == b.root
        and set(a.nodes) == set(b.nodes)
        and Counter(a.edges) == Counter(b.edges)
    )
