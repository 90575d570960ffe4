"""Random generators and brute-force oracles shared by the tests.

The oracles here deliberately avoid the library's own evaluation code.
"""

from __future__ import annotations

import itertools
import random

from enthymeme.logic import And, Letter, Not, Top, TopType


def random_formula(rng: random.Random, letters: int, depth: int, top: bool = False):
    if depth == 0 or rng.random() < 0.25:
        if top and rng.random() < 0.05:
            return Top
        return Letter(rng.randint(1, letters))
    if rng.random() < 0.35:
        return Not(random_formula(rng, letters, depth - 1, top))
    return And(random_formula(rng, letters, depth - 1, top), random_formula(rng, letters, depth - 1, top))


def truth(f, values: dict[int, bool]) -> bool:
    if isinstance(f, Letter):
        return values[f.index]
    if isinstance(f, Not):
        return not truth(f.body, values)
    if isinstance(f, And):
        return truth(f.left, values) and truth(f.right, values)
    assert isinstance(f, TopType)
    return True


def assignments(n: int):
    for bits in itertools.product((False, True), repeat=n):
        yield {i + 1: b for i, b in enumerate(bits)}


def brute_satisfiable(f, n: int) -> bool:
    return any(truth(f, v) for v in assignments(n))


def brute_classify(phi, psi, n: int) -> str:
    rows = [(truth(phi, v), truth(psi, v)) for v in assignments(n)]
    if not any(p for p, _ in rows):
        return "Contradiction"
    if all(q for p, q in rows if p):
        return "Entailment"
    if not any(q for p, q in rows if p):
        return "Contradiction"
    return "Neutral"


def clause_true(clause, values) -> bool:
    return any(values[abs(l)] == (l > 0) for l in clause)


def brute_cnf_sat(clauses, n: int) -> bool:
    return any(all(clause_true(c, v) for c in clauses) for v in assignments(n))


def random_cnf(rng: random.Random, letters: int) -> list[frozenset[int]]:
    clauses = []
    for _ in range(rng.randint(0, 4 * letters)):
        width = rng.randint(1, 3)
        clauses.append(frozenset(rng.choice((-1, 1)) * rng.randint(1, letters) for _ in range(width)))
    return clauses
