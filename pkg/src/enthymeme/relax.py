"""Relaxing AMR formulas into abstract propositional formulas.

Atoms are verbalized through role templates, compared by embedding
similarity (neuro-matching, ``≃``) and by NLI contradiction
(neuro-contradict, ``⊥``), and then mapped onto propositional letters
so that matched atoms share a letter and contradicting atoms receive
complementary literals.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .logic import AmrAtom, And, Atom, Formula, Letter, Not, TopType, atoms, leaves_in_order
from .providers.base import Embedder, NliModel, NliOutcome, NliScores, cosine_similarity, nli_label

log = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Templates


@dataclass(frozen=True)
class Template:
    role: str
    pattern: str

    def __post_init__(self) -> None:
        if self.pattern.count("[X]") != 1 or self.pattern.count("[Y]") != 1:
            raise ValueError(f"template for {self.role!r} needs exactly one [X] and one [Y]: {self.pattern!r}")

    def fill(self, x: str, y: str) -> str:
        # single pass so a constant containing "[Y]" is never re-substituted
        head, _, tail = self.pattern.partition("[X]")
        if "[Y]" in head:
            a, _, b = head.partition("[Y]")
            return a + y + b + x + tail
        a, _, b = tail.partition("[Y]")
        return head + x + a + y + b


FALLBACK_PATTERN = "[Y] is the {role} of [X]."


@dataclass
class TemplateRegistry:
    templates: dict[str, Template] = field(default_factory=dict)

    def lookup(self, role: str) -> Template:
        role = role.lower().lstrip(":")
        found = self.templates.get(role)
        if found is not None:
            return found
        return Template(role, FALLBACK_PATTERN.format(role=role))

    def __len__(self) -> int:
        return len(self.templates)

    @classmethod
    def from_text(cls, text: str) -> "TemplateRegistry":
        """Parse ``role<TAB>pattern`` lines; ``#`` starts a comment line."""
        templates = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            role, sep, pattern = line.partition("\t")
            if not sep:
                raise ValueError(f"line {lineno}: expected 'role<TAB>pattern'")
            role = role.strip().lower().lstrip(":")
            templates[role] = Template(role, pattern.strip())
        return cls(templates)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "TemplateRegistry":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def default_registry() -> TemplateRegistry:
    text = resources.files("enthymeme").joinpath("data/templates.tsv").read_text(encoding="utf-8")
    return TemplateRegistry.from_text(text)


def instantiate(atom: AmrAtom, registry: TemplateRegistry) -> str:
    """Verbalize ``r(a, b)`` by filling [X] with ``a`` and [Y] with ``b``."""
    return registry.lookup(atom.role).fill(atom.left, atom.right)


# ---------------------------------------------------------------------------
# Relations


@dataclass(frozen=True, order=True)
class MatchEdge:
    claim_atom: AmrAtom
    premise_atom: AmrAtom
    score: float

    def __str__(self) -> str:
        return f"{self.claim_atom} ≃ {self.premise_atom} ({self.score:.4f})"

    def as_dict(self) -> dict:
        return {"claim": str(self.claim_atom), "premise": str(self.premise_atom), "score": self.score}


@dataclass(frozen=True, order=True)
class ContradictEdge:
    claim_atom: AmrAtom
    premise_atom: AmrAtom
    con_score: float

    def __str__(self) -> str:
        return f"{self.claim_atom} ⊥ {self.premise_atom} ({self.con_score:g})"

    def as_dict(self) -> dict:
        return {"claim": str(self.claim_atom), "premise": str(self.premise_atom), "con": self.con_score}


@dataclass(frozen=True)
class RelationSet:
    matches: frozenset[MatchEdge] = frozenset()
    contradicts: frozenset[ContradictEdge] = frozenset()

    def __post_init__(self) -> None:
        claims = [m.claim_atom for m in self.matches]
        if len(claims) != len(set(claims)):
            raise ValueError("at most one match edge per claim atom")

    def as_dict(self) -> dict:
        return {
            "matches": [m.as_dict() for m in sorted(self.matches)],
            "contradicts": [c.as_dict() for c in sorted(self.contradicts)],
        }


@dataclass
class PairScores:
    """Raw provider scores for every (claim atom, premise atom) pair.

    Thresholds are applied afterwards, so one set of provider calls serves
    any number of threshold settings.
    """

    claim_atoms: list[AmrAtom]
    premise_atoms: list[AmrAtom]
    sentences: dict[AmrAtom, str]
    similarity: dict[tuple[AmrAtom, AmrAtom], float] = field(default_factory=dict)
    nli: dict[tuple[AmrAtom, AmrAtom], NliScores] = field(default_factory=dict)


def score_pairs(
    premise: Formula,
    claim: Formula,
    registry: TemplateRegistry,
    embedder: Embedder | None = None,
    nli: NliModel | None = None,
    max_workers: int = 4,
) -> PairScores:
    """Query the providers for every claim/premise atom pair.

    Each distinct sentence is embedded once; NLI is called with the claim
    atom's sentence first.
    """
    claim_atoms = sorted(atoms(claim))
    premise_atoms = sorted(atoms(premise))
    sentences = {a: instantiate(a, registry) for a in set(claim_atoms) | set(premise_atoms)}
    scores = PairScores(claim_atoms, premise_atoms, sentences)
    pairs = [(c, p) for c in claim_atoms for p in premise_atoms]
    if not pairs:
        return scores
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        if embedder is not None:
            texts = sorted(set(sentences.values()))
            vectors = dict(zip(texts, pool.map(embedder.embed, texts)))
            for c, p in pairs:
                scores.similarity[(c, p)] = cosine_similarity(vectors[sentences[c]], vectors[sentences[p]])
        if nli is not None:
            results = pool.map(lambda cp: nli.nli(sentences[cp[0]], sentences[cp[1]]), pairs)
            scores.nli = dict(zip(pairs, results))
    return scores


def matches_from_scores(scores: PairScores, tau_m: float) -> frozenset[MatchEdge]:
    """Best premise atom above ``tau_m`` for each claim atom; ties go to
    the canonically smaller premise atom."""
    if not 0.0 <= tau_m <= 1.0:
        raise ValueError(f"tau_m must lie in [0, 1], got {tau_m}")
    edges = []
    for c in scores.claim_atoms:
        best: tuple[float, AmrAtom] | None = None
        for p in scores.premise_atoms:
            x = scores.similarity.get((c, p))
            if x is None or not x > tau_m:
                continue
            if best is None or x > best[0] or (x == best[0] and p < best[1]):
                best = (x, p)
        if best is not None:
            edges.append(MatchEdge(c, best[1], best[0]))
    return frozenset(edges)


def contradicts_from_scores(scores: PairScores, tau_c: float, seed: int = 0) -> frozenset[ContradictEdge]:
    if not 0.0 <= tau_c <= 100.0:
        raise ValueError(f"tau_c must lie in [0, 100], got {tau_c}")
    edges = []
    for (c, p), s in scores.nli.items():
        if nli_label(s, seed) is NliOutcome.CON and s.con >= tau_c:
            edges.append(ContradictEdge(c, p, s.con))
    return frozenset(edges)


def relations_from_scores(scores: PairScores, tau_m: float, tau_c: float, seed: int = 0) -> RelationSet:
    return RelationSet(matches_from_scores(scores, tau_m), contradicts_from_scores(scores, tau_c, seed))


def compute_matches(premise: Formula, claim: Formula, tau_m: float, embedder: Embedder,
                    registry: TemplateRegistry) -> frozenset[MatchEdge]:
    return matches_from_scores(score_pairs(premise, claim, registry, embedder=embedder), tau_m)


def compute_contradicts(premise: Formula, claim: Formula, tau_c: float, nli: NliModel,
                        registry: TemplateRegistry, seed: int = 0) -> frozenset[ContradictEdge]:
    return contradicts_from_scores(score_pairs(premise, claim, registry, nli=nli), tau_c, seed)


# ---------------------------------------------------------------------------
# Mapping onto propositional letters


class ConflictError(ValueError):
    def __init__(self, message: str, atoms: Sequence[AmrAtom] = (), edges: Sequence[object] = ()):
        super().__init__(message)
        self.atoms = tuple(atoms)
        self.edges = tuple(edges)


class UnmappedAtom(KeyError):
    pass


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[AmrAtom, AmrAtom] = {}

    def find(self, a: AmrAtom) -> AmrAtom:
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: AmrAtom, b: AmrAtom) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class Mapping:
    """The assignment ``g`` from AMR atoms to signed letters (``-2`` is ¬x2)."""

    assignment: dict[AmrAtom, int]
    alphabet_size: int
    relations: RelationSet = RelationSet()
    dropped: tuple[ContradictEdge, ...] = ()

    def __getitem__(self, atom: AmrAtom) -> int:
        try:
            return self.assignment[atom]
        except KeyError:
            raise UnmappedAtom(str(atom)) from None

    def literal(self, atom: AmrAtom) -> Formula:
        lit = self[atom]
        return Letter(lit) if lit > 0 else Not(Letter(-lit))

    def as_dict(self) -> dict[str, str]:
        return {
            str(a): (f"x{lit}" if lit > 0 else f"¬x{-lit}")
            for a, lit in sorted(self.assignment.items(), key=lambda kv: (abs(kv[1]), kv[1] < 0, kv[0]))
        }


def build_mapping(
    formulas: Iterable[Formula],
    relations: RelationSet = RelationSet(),
    drop_conflicts: bool = False,
) -> Mapping:
    """Assign letters so that ≃-related atoms share a literal and
    ⊥-related atoms get complementary literals.

    ≃ edges are closed symmetrically and transitively into classes.  Classes
    linked by ⊥ edges share one letter and are 2-coloured for its sign.
    Letters are numbered by first occurrence in ``formulas`` and the first
    class met in each ⊥-component takes the positive sign.

    A ⊥ edge inside one ≃-class, or an odd ⊥ cycle, raises
    :class:`ConflictError`; with ``drop_conflicts`` the edge is dropped
    with a warning instead.
    """
    order: list[AmrAtom] = []
    seen: set[AmrAtom] = set()
    for f in formulas:
        for leaf in leaves_in_order(f):
            if isinstance(leaf, Atom) and leaf.atom not in seen:
                seen.add(leaf.atom)
                order.append(leaf.atom)
    extra = set()
    for e in (*relations.matches, *relations.contradicts):
        extra.update((e.claim_atom, e.premise_atom))
    order += sorted(extra - seen)

    uf = _UnionFind()
    for a in order:
        uf.find(a)
    for m in sorted(relations.matches):
        uf.union(m.claim_atom, m.premise_atom)

    dropped: list[ContradictEdge] = []
    adjacency: dict[AmrAtom, list[tuple[AmrAtom, ContradictEdge]]] = {}
    for c in sorted(relations.contradicts):
        a, b = uf.find(c.claim_atom), uf.find(c.premise_atom)
        if a == b:
            if not drop_conflicts:
                raise ConflictError(
                    f"{c.claim_atom} and {c.premise_atom} are both matched and contradicting",
                    (c.claim_atom, c.premise_atom), (c,),
                )
            log.warning("dropping contradiction inside a matched class: %s", c)
            dropped.append(c)
            continue
        adjacency.setdefault(a, []).append((b, c))
        adjacency.setdefault(b, []).append((a, c))

    sign: dict[AmrAtom, int] = {}
    letter: dict[AmrAtom, int] = {}
    next_letter = 0
    for atom in order:
        start = uf.find(atom)
        if start in letter:
            continue
        next_letter += 1
        letter[start], sign[start] = next_letter, 1
        queue = [start]
        while queue:
            cls = queue.pop(0)
            for other, edge in adjacency.get(cls, ()):
                if other not in sign:
                    letter[other], sign[other] = next_letter, -sign[cls]
                    queue.append(other)
                elif sign[other] == sign[cls] and edge not in dropped:
                    if not drop_conflicts:
                        raise ConflictError(
                            f"contradiction edges form an odd cycle through {edge}",
                            (edge.claim_atom, edge.premise_atom), (edge,),
                        )
                    log.warning("dropping contradiction that closes an odd cycle: %s", edge)
                    dropped.append(edge)

    assignment = {a: letter[uf.find(a)] * sign[uf.find(a)] for a in order}
    return Mapping(assignment, next_letter, relations, tuple(dropped))


def translate(formula: Formula, mapping: Mapping) -> Formula:
    """Replace each atom by its literal under ``mapping``."""
    if isinstance(formula, Atom):
        return mapping.literal(formula.atom)
    if isinstance(formula, And):
        return And(translate(formula.left, mapping), translate(formula.right, mapping))
    if isinstance(formula, Not):
        return Not(translate(formula.body, mapping))
    if isinstance(formula, TopType):
        return formula
    raise TypeError(f"cannot translate {type(formula).__name__}")
