"""From AMR graphs to propositional formulas.

The path is ``AmrGraph -> FOL (nested existential conjunction) -> ground
AMR formula``.  AMR formulas and abstract formulas share one tree type;
they differ only in their leaves (:class:`Atom` vs :class:`Letter`).

Text syntax used for fixtures and CLI output::

    formula := conj
    conj    := unary ('&' unary)*
    unary   := '~' unary | '(' formula ')' | 'true' | letter | atom
    letter  := 'x' DIGITS
    atom    := ROLE '(' ARG ',' ARG ')'      ARG may contain spaces

The pretty form (``str(formula)``) uses ``∧``, ``¬`` and ``⊤``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

from .amr import AmrGraph, AmrNode, Constant, validate

# ---------------------------------------------------------------------------
# First-order intermediate form


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: str

    def __str__(self) -> str:
        return self.value


Term = Union[Var, Const]


@dataclass(frozen=True)
class Monadic:
    concept: str
    var: Var

    def __str__(self) -> str:
        return f"{strip_sense(self.concept)}({self.var})"


@dataclass(frozen=True)
class Dyadic:
    role: str
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.role}({self.left},{self.right})"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "FolFormula"

    def __str__(self) -> str:
        return f"∃{self.var}({self.body})"


@dataclass(frozen=True)
class FolAnd:
    items: tuple["FolFormula", ...]

    def __str__(self) -> str:
        return " ∧ ".join(str(i) for i in self.items)


@dataclass(frozen=True)
class FolNot:
    body: "FolFormula"

    def __str__(self) -> str:
        inner = str(self.body)
        return f"¬({inner})" if isinstance(self.body, FolAnd) else f"¬{inner}"


FolFormula = Union[Exists, FolAnd, FolNot, Monadic, Dyadic]


class MissingConceptDeclaration(ValueError):
    pass


_SENSE_RE = re.compile(r"-\d+$")


def strip_sense(concept: str) -> str:
    """``want-01`` -> ``want``."""
    return _SENSE_RE.sub("", concept)


def _and(items: list[FolFormula]) -> FolFormula:
    return items[0] if len(items) == 1 else FolAnd(tuple(items))


def amr_to_fol(graph: AmrGraph) -> FolFormula:
    """Translate a graph into a nested existential conjunction.

    Each node contributes its concept atom followed, edge by edge, by the
    role atom and the child's own conjuncts.  Existentials of non-negated
    children are hoisted to the enclosing scope so that re-entrant
    references stay bound; a negated node wraps its own existential
    subformula in a negation inside the parent scope.
    """
    violations = validate(graph)
    if violations:
        raise violations[0].as_error()

    # declaration tree: the first written edge reaching a node declares it
    declared_by: dict[str, object] = {graph.root: None}
    tree_parent: dict[str, str | None] = {graph.root: None}
    for edge, var, first in graph.walk():
        if first and edge is not None:
            declared_by[var] = edge
            tree_parent[var] = edge.parent

    def scope_of(var: str) -> str | None:
        # nearest negated ancestor-or-self; None is the top-level scope
        cur: str | None = var
        while cur is not None:
            if graph.node(cur).negated:
                return cur
            cur = tree_parent[cur]
        return None

    def encloses(outer: str | None, inner: str | None) -> bool:
        if outer is None:
            return True
        cur = inner
        while cur is not None:
            if cur == outer:
                return True
            cur = tree_parent[cur]
        return False

    # variables referenced outside the negated scope that declares them
    # must be bound at the top level instead
    hoisted: set[str] = set()
    for e in graph.edges:
        if e.is_constant or declared_by.get(e.child) is e:  # type: ignore[arg-type]
            continue
        if not encloses(scope_of(e.child), scope_of(e.parent)):  # type: ignore[arg-type]
            hoisted.add(e.child)  # type: ignore[arg-type]

    def atom_for(e) -> Dyadic:
        right = Const(e.target.value) if isinstance(e.target, Constant) else Var(e.target)
        return Dyadic(e.role, Var(e.source), right)

    def translate(var: str) -> tuple[list[str], list[FolFormula]]:
        node = graph.node(var)
        conj: list[FolFormula] = [Monadic(node.concept, Var(var))]
        bound: list[str] = []
        for e in graph.children(var):
            child = e.child
            if isinstance(child, Constant) or declared_by.get(child) is not e:
                conj.append(atom_for(e))
                continue
            child_bound, child_conj = translate(child)
            if graph.node(child).negated:
                body: FolFormula = _and([atom_for(e)] + child_conj)
                for v in reversed([child] + child_bound):
                    if v not in hoisted:
                        body = Exists(Var(v), body)
                conj.append(FolNot(body))
            else:
                bound += [child] + child_bound
                conj.append(atom_for(e))
                conj.extend(child_conj)
        return bound, conj

    bound, conj = translate(graph.root)
    body = _and(conj)
    root_negated = graph.node(graph.root).negated
    inner = [graph.root] + bound
    top = [v for v in inner if v not in hoisted] if root_negated else inner
    for v in reversed(top):
        body = Exists(Var(v), body)
    if root_negated:
        body = FolNot(body)
        for v in reversed(sorted(hoisted & set(inner), key=inner.index)):
            body = Exists(Var(v), body)
    # hoisted variables declared under negations are bound outermost
    outer = sorted(hoisted - set(inner), key=lambda v: [n.variable for n in graph.nodes].index(v))
    for v in reversed(outer):
        body = Exists(Var(v), body)
    return body


def collapse_modifiers(graph: AmrGraph) -> AmrGraph:
    """Fold ``:mod`` leaves into multi-word concepts (``large insect``).

    Only leaf modifiers that are not negated and not re-entrant are folded.
    """
    refcount: dict[str, int] = {}
    for e in graph.edges:
        if not e.is_constant:
            refcount[e.child] = refcount.get(e.child, 0) + 1  # type: ignore[index]
    has_children = {e.parent for e in graph.edges}
    folded: dict[str, list[str]] = {}
    drop_nodes: set[str] = set()
    drop_edges = set()
    for e in graph.edges:
        if e.role != "mod" or e.inverted or e.is_constant:
            continue
        leaf = graph.node(e.target)  # type: ignore[arg-type]
        if leaf.negated or leaf.variable in has_children or refcount.get(leaf.variable) != 1:
            continue
        folded.setdefault(e.source, []).append(strip_sense(leaf.concept))
        drop_nodes.add(leaf.variable)
        drop_edges.add(e)
    if not folded:
        return graph
    nodes = tuple(
        AmrNode(n.variable, " ".join(folded[n.variable] + [strip_sense(n.concept)]), n.negated)
        if n.variable in folded
        else n
        for n in graph.nodes
        if n.variable not in drop_nodes
    )
    edges = tuple(e for e in graph.edges if e not in drop_edges)
    return AmrGraph(graph.root, nodes, edges)


# ---------------------------------------------------------------------------
# Propositional formulas


@dataclass(frozen=True, order=True)
class AmrAtom:
    role: str
    left: str
    right: str

    def __str__(self) -> str:
        return f"{self.role}({self.left},{self.right})"


@dataclass(frozen=True)
class Atom:
    atom: AmrAtom

    def __str__(self) -> str:
        return str(self.atom)


@dataclass(frozen=True)
class Letter:
    index: int

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def conjuncts(self) -> list["Formula"]:
        out: list[Formula] = []
        stack: list[Formula] = [self]
        while stack:
            f = stack.pop()
            if isinstance(f, And):
                stack.append(f.right)
                stack.append(f.left)
            else:
                out.append(f)
        return out

    def __str__(self) -> str:
        return " ∧ ".join(_pretty_operand(c) for c in self.conjuncts())


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self) -> str:
        return "¬" + _pretty_operand(self.body)


@dataclass(frozen=True)
class TopType:
    def __str__(self) -> str:
        return "⊤"


Top = TopType()

Formula = Union[Atom, Letter, And, Not, TopType]
AmrFormula = Formula
AbstractFormula = Formula


def _pretty_operand(f: Formula) -> str:
    return f"({f})" if isinstance(f, And) else str(f)


def conj(items: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``Top``."""
    items = list(items)
    if not items:
        return Top
    out = items[-1]
    for f in reversed(items[:-1]):
        out = And(f, out)
    return out


def neg(f: Formula) -> Formula:
    return Not(f)


def atoms(formula: Formula) -> frozenset:
    """Leaves of ``formula``: :class:`AmrAtom` values or letter indexes."""
    found: set = set()
    stack = [formula]
    while stack:
        f = stack.pop()
        if isinstance(f, And):
            stack += [f.left, f.right]
        elif isinstance(f, Not):
            stack.append(f.body)
        elif isinstance(f, Atom):
            found.add(f.atom)
        elif isinstance(f, Letter):
            found.add(f.index)
    return frozenset(found)


def leaves_in_order(formula: Formula) -> Iterator[Formula]:
    """Leaf nodes left to right (duplicates included)."""
    if isinstance(formula, And):
        yield from leaves_in_order(formula.left)
        yield from leaves_in_order(formula.right)
    elif isinstance(formula, Not):
        yield from leaves_in_order(formula.body)
    else:
        yield formula


def skeleton(formula: Formula) -> tuple:
    """The ∧/¬ shape with leaves erased (⊤ kept, as it is not an atom)."""
    if isinstance(formula, And):
        return ("and", skeleton(formula.left), skeleton(formula.right))
    if isinstance(formula, Not):
        return ("not", skeleton(formula.body))
    if formula is Top or isinstance(formula, TopType):
        return ("top",)
    return ("leaf",)


def evaluate(formula: Formula, assignment: Mapping) -> bool:
    """Truth value with leaves looked up in ``assignment``
    (keyed by AmrAtom or letter index)."""
    if isinstance(formula, And):
        return evaluate(formula.left, assignment) and evaluate(formula.right, assignment)
    if isinstance(formula, Not):
        return not evaluate(formula.body, assignment)
    if isinstance(formula, Atom):
        return bool(assignment[formula.atom])
    if isinstance(formula, Letter):
        return bool(assignment[formula.index])
    return True


def to_text(formula: Formula) -> str:
    """Render in the ASCII fixture syntax."""
    if isinstance(formula, And):
        return " & ".join(_text_operand(c) for c in formula.conjuncts())
    if isinstance(formula, Not):
        return "~" + _text_operand(formula.body)
    if isinstance(formula, TopType):
        return "true"
    if isinstance(formula, Atom):
        a = formula.atom
        return f"{a.role}({_text_arg(a.left)},{_text_arg(a.right)})"
    return str(formula)


def _text_operand(f: Formula) -> str:
    return f"({to_text(f)})" if isinstance(f, And) else to_text(f)


def _text_arg(arg: str) -> str:
    if re.search(r'[,()"&~]', arg) or arg != arg.strip() or not arg:
        return '"' + arg.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return arg


class FormulaSyntaxError(ValueError):
    pass


_FORMULA_TOKEN = re.compile(
    r'\s*(?:(?P<op>[&~(),])|(?P<str>"(?:[^"\\]|\\.)*")|(?P<word>[^\s&~(),"]+(?:[ \t]+[^\s&~(),"]+)*))'
)


def parse_formula(text: str) -> Formula:
    """Inverse of :func:`to_text`."""
    tokens: list[tuple[str, str]] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _FORMULA_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"bad input at offset {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        kind = m.lastgroup or ""
        tokens.append((kind, m.group(kind)))
    i = 0

    def peek() -> tuple[str, str] | None:
        return tokens[i] if i < len(tokens) else None

    def expect(value: str) -> None:
        nonlocal i
        if peek() != ("op", value):
            raise FormulaSyntaxError(f"expected {value!r} at token {i}")
        i += 1

    def arg() -> str:
        nonlocal i
        tok = peek()
        if tok is None or tok[0] == "op":
            raise FormulaSyntaxError(f"expected an atom argument at token {i}")
        i += 1
        if tok[0] == "str":
            return bytes(tok[1][1:-1], "utf-8").decode("unicode_escape")
        return tok[1]

    def unary() -> Formula:
        nonlocal i
        tok = peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of formula")
        if tok == ("op", "~"):
            i += 1
            return Not(unary())
        if tok == ("op", "("):
            i += 1
            f = conjunction()
            expect(")")
            return f
        if tok[0] != "word":
            raise FormulaSyntaxError(f"unexpected {tok[1]!r}")
        i += 1
        word = tok[1]
        if peek() == ("op", "("):
            i += 1
            left = arg()
            expect(",")
            right = arg()
            expect(")")
            return Atom(AmrAtom(word, left, right))
        if word == "true":
            return Top
        m = re.fullmatch(r"x(\d+)", word)
        if m:
            return Letter(int(m.group(1)))
        raise FormulaSyntaxError(f"unknown symbol {word!r}")

    def conjunction() -> Formula:
        nonlocal i
        items = [unary()]
        while peek() == ("op", "&"):
            i += 1
            items.append(unary())
        return conj(items)

    f = conjunction()
    if i != len(tokens):
        raise FormulaSyntaxError(f"trailing tokens after formula: {tokens[i:]}")
    return f


# ---------------------------------------------------------------------------
# Grounding


def ground_fol(fol: FolFormula) -> Formula:
    """Replace each existential variable by a constant named after its
    concept, drop monadic atoms and quantifiers.

    Repeated concepts get numeric suffixes in declaration order
    (``boy``, ``boy2``, ...) so distinct entities never merge.
    """
    concept_of: dict[str, str] = {}
    order: list[str] = []

    def collect(f: FolFormula) -> None:
        if isinstance(f, Exists):
            order.append(f.var.name)
            collect(f.body)
        elif isinstance(f, FolAnd):
            for item in f.items:
                collect(item)
        elif isinstance(f, FolNot):
            collect(f.body)
        elif isinstance(f, Monadic):
            concept_of[f.var.name] = f.concept

    collect(fol)
    names: dict[str, str] = {}
    used: set[str] = set()
    for var in order + [v for v in concept_of if v not in order]:
        if var not in concept_of:
            raise MissingConceptDeclaration(f"variable {var!r} has no concept atom")
        base = strip_sense(concept_of[var])
        name, k = base, 1
        while name in used:
            k += 1
            name = f"{base}{k}"
        used.add(name)
        names[var] = name

    def term(t: Term) -> str:
        if isinstance(t, Const):
            return t.value
        if t.name not in names:
            raise MissingConceptDeclaration(f"variable {t.name!r} has no concept atom")
        return names[t.name]

    def ground(f: FolFormula) -> Formula | None:
        if isinstance(f, Exists):
            return ground(f.body)
        if isinstance(f, Monadic):
            return None
        if isinstance(f, Dyadic):
            return Atom(AmrAtom(f.role, term(f.left), term(f.right)))
        if isinstance(f, FolNot):
            inner = ground(f.body)
            return Not(Top if inner is None else inner)
        kept = [g for g in (ground(i) for i in f.items) if g is not None]
        return conj(kept) if kept else None

    out = ground(fol)
    return Top if out is None else out


def fol_skeleton(fol: FolFormula) -> tuple | None:
    """∧/¬ shape of ``fol`` once quantifiers and monadic atoms are erased,
    built the same way :func:`skeleton` shapes a right-nested formula."""
    if isinstance(fol, Exists):
        return fol_skeleton(fol.body)
    if isinstance(fol, Monadic):
        return None
    if isinstance(fol, Dyadic):
        return ("leaf",)
    if isinstance(fol, FolNot):
        inner = fol_skeleton(fol.body)
        return ("not", ("top",) if inner is None else inner)
    kept = [s for s in (fol_skeleton(i) for i in fol.items) if s is not None]
    if not kept:
        return None
    out = kept[-1]
    for s in reversed(kept[:-1]):
        out = ("and", s, out)
    return out


def graph_to_formula(graph: AmrGraph, compound_constants: bool = False) -> Formula:
    """Convenience: graph -> grounded AMR formula."""
    if compound_constants:
        graph = collapse_modifiers(graph)
    return ground_fol(amr_to_fol(graph))


# ---------------------------------------------------------------------------
# CNF


@dataclass(frozen=True)
class Cnf:
    """Clauses of signed letter indexes (DIMACS convention: ``-3`` is ¬x3).

    ``num_letters`` counts every letter that may appear, including fresh
    letters introduced by the Tseitin fallback.
    """

    clauses: frozenset[frozenset[int]]
    num_letters: int

    def __str__(self) -> str:
        if not self.clauses:
            return "⊤"
        rendered = sorted(sorted(c, key=lambda l: (abs(l), l < 0)) for c in self.clauses)
        return " ∧ ".join(
            "(" + " ∨ ".join(f"{'¬' if l < 0 else ''}x{abs(l)}" for l in c) + ")" for c in rendered
        )


DEFAULT_CLAUSE_BUDGET = 10_000

# NNF nodes: int literal, True/False, ("and", [...]), ("or", [...])


def _nnf(f: Formula, positive: bool = True):
    if isinstance(f, Letter):
        return f.index if positive else -f.index
    if isinstance(f, TopType):
        return positive
    if isinstance(f, Not):
        return _nnf(f.body, not positive)
    if isinstance(f, And):
        parts = [_nnf(c, positive) for c in f.conjuncts()]
        op = "and" if positive else "or"
        return _simplify(op, parts)
    raise TypeError(f"to_cnf needs an abstract formula, got {type(f).__name__}")


def _simplify(op: str, parts: list):
    absorbing, neutral = (False, True) if op == "and" else (True, False)
    flat: list = []
    for p in parts:
        if p is absorbing:
            return absorbing
        if p is neutral:
            continue
        if isinstance(p, tuple) and p[0] == op:
            flat.extend(p[1])
        else:
            flat.append(p)
    if not flat:
        return neutral
    if len(flat) == 1:
        return flat[0]
    return (op, flat)


def _clause_count(n) -> int:
    if isinstance(n, bool) or isinstance(n, int):
        return 1
    op, parts = n
    counts = [_clause_count(p) for p in parts]
    if op == "and":
        return sum(counts)
    total = 1
    for c in counts:
        total *= c
    return total


def _distribute(n) -> list[frozenset[int]]:
    if n is True:
        return []
    if n is False:
        return [frozenset()]
    if isinstance(n, int):
        return [frozenset([n])]
    op, parts = n
    if op == "and":
        return [c for p in parts for c in _distribute(p)]
    out = [frozenset()]
    for p in parts:
        out = [a | b for a in out for b in _distribute(p)]
    return out


def _tseitin(n, next_letter: int) -> tuple[list[frozenset[int]], int]:
    """One-sided (Plaisted-Greenbaum) encoding; equisatisfiable."""
    clauses: list[frozenset[int]] = []
    counter = itertools.count(next_letter)

    def encode(node) -> int:
        if isinstance(node, int) and not isinstance(node, bool):
            return node
        op, parts = node
        lits = [encode(p) for p in parts]
        aux = next(counter)
        if op == "and":
            clauses.extend(frozenset([-aux, l]) for l in lits)
        else:
            clauses.append(frozenset([-aux, *lits]))
        return aux

    if n is True:
        return [], next_letter - 1
    if n is False:
        return [frozenset()], next_letter - 1
    root = encode(n)
    clauses.append(frozenset([root]))
    return clauses, next(counter) - 1


def to_cnf(formula: Formula, clause_budget: int = DEFAULT_CLAUSE_BUDGET) -> Cnf:
    """Negation normal form, then distribution of ∨ over ∧.

    When distribution would exceed ``clause_budget`` clauses, an
    equisatisfiable Tseitin-style encoding with fresh letters is used
    instead; callers only ever ask about satisfiability.
    """
    n = _nnf(formula)
    letters = atoms(formula)
    top_letter = max(letters, default=0)
    if _clause_count(n) <= clause_budget:
        clauses = _distribute(n)
        num = top_letter
    else:
        clauses, num = _tseitin(n, top_letter + 1)
        num = max(num, top_letter)
    kept = frozenset(c for c in clauses if not any(-l in c for l in c))
    return Cnf(kept, num)


def to_dimacs(cnf: Cnf) -> str:
    clauses = sorted(sorted(c, key=lambda l: (abs(l), l)) for c in cnf.clauses)
    lines = [f"p cnf {cnf.num_letters} {len(clauses)}"]
    lines += [" ".join(str(l) for l in c) + " 0" for c in clauses]
    return "\n".join(lines) + "\n"
