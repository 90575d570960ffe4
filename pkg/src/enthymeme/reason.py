"""SAT-based entailment and contradiction checks."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Protocol

from .logic import (
    DEFAULT_CLAUSE_BUDGET,
    And,
    Cnf,
    Formula,
    Not,
    atoms,
    evaluate,
    to_cnf,
)


@dataclass(frozen=True)
class SatResult:
    satisfiable: bool
    model: dict[int, bool] | None = None

    def __bool__(self) -> bool:
        return self.satisfiable


class Solver(Protocol):
    def solve(self, cnf: Cnf) -> SatResult: ...


class DpllSolver:
    """Recursive DPLL with unit propagation and pure-literal elimination.

    Instances in this pipeline have tens of letters, so clause sets are
    copied at each branch rather than using watched literals.
    """

    def solve(self, cnf: Cnf) -> SatResult:
        clauses = [set(c) for c in cnf.clauses]
        model = self._dpll(clauses, {})
        if model is None:
            return SatResult(False)
        letters = {abs(l) for c in cnf.clauses for l in c}
        letters.update(range(1, cnf.num_letters + 1))
        full = {v: model.get(v, True) for v in sorted(letters)}
        return SatResult(True, full)

    def _dpll(self, clauses: list[set[int]], model: dict[int, bool]) -> dict[int, bool] | None:
        clauses, model = [set(c) for c in clauses], dict(model)
        while True:
            if any(not c for c in clauses):
                return None
            unit = next((c for c in clauses if len(c) == 1), None)
            if unit is not None:
                (lit,) = unit
                clauses = _assign(clauses, lit)
                model[abs(lit)] = lit > 0
                continue
            present = {l for c in clauses for l in c}
            pure = [l for l in present if -l not in present]
            if pure:
                for lit in pure:
                    model[abs(lit)] = lit > 0
                clauses = [c for c in clauses if not (c & set(pure))]
                continue
            break
        if not clauses:
            return model
        # branch on the most frequent letter, smallest index on ties
        counts: dict[int, int] = {}
        for c in clauses:
            for l in c:
                counts[abs(l)] = counts.get(abs(l), 0) + 1
        var = min(counts, key=lambda v: (-counts[v], v))
        for lit in (var, -var):
            found = self._dpll(_assign(clauses, lit), {**model, var: lit > 0})
            if found is not None:
                return found
        return None


def _assign(clauses: list[set[int]], lit: int) -> list[set[int]]:
    return [c - {-lit} for c in clauses if lit not in c]


def sat(cnf: Cnf, solver: Solver | None = None) -> SatResult:
    return (solver or DpllSolver()).solve(cnf)


def satisfiable(formula: Formula, solver: Solver | None = None,
                clause_budget: int = DEFAULT_CLAUSE_BUDGET) -> bool:
    return sat(to_cnf(formula, clause_budget), solver).satisfiable


def entails(phi: Formula, psi: Formula, solver: Solver | None = None) -> bool:
    """``phi ⊢ psi`` iff ``phi ∧ ¬psi`` is unsatisfiable."""
    return not satisfiable(And(phi, Not(psi)), solver)


def contradicts(phi: Formula, psi: Formula, solver: Solver | None = None) -> bool:
    """``{phi, psi} ⊢ ⊥`` iff ``phi ∧ psi`` is unsatisfiable."""
    return not satisfiable(And(phi, psi), solver)


class VerdictLabel(str, enum.Enum):
    ENTAILMENT = "Entailment"
    CONTRADICTION = "Contradiction"
    NEUTRAL = "Neutral"


@dataclass(frozen=True)
class Verdict:
    label: VerdictLabel
    premise_inconsistent: bool = False
    cnfs: dict[str, Cnf] = field(default_factory=dict, compare=False, repr=False)

    def __str__(self) -> str:
        return self.label.value + (" (inconsistent premise)" if self.premise_inconsistent else "")


def classify(phi: Formula, psi: Formula, solver: Solver | None = None) -> Verdict:
    """Three-way verdict.  An unsatisfiable premise is reported as a
    contradiction with ``premise_inconsistent`` set, since both checks
    would fire."""
    solver = solver or DpllSolver()
    cnfs = {
        "premise": to_cnf(phi),
        "entailment": to_cnf(And(phi, Not(psi))),
        "contradiction": to_cnf(And(phi, psi)),
    }
    if not sat(cnfs["premise"], solver):
        return Verdict(VerdictLabel.CONTRADICTION, True, cnfs)
    if not sat(cnfs["entailment"], solver):
        return Verdict(VerdictLabel.ENTAILMENT, False, cnfs)
    if not sat(cnfs["contradiction"], solver):
        return Verdict(VerdictLabel.CONTRADICTION, False, cnfs)
    return Verdict(VerdictLabel.NEUTRAL, False, cnfs)


TRUTH_TABLE_LIMIT = 12


def truth_table_classify(phi: Formula, psi: Formula, limit: int = TRUTH_TABLE_LIMIT) -> Verdict | None:
    """Same decision as :func:`classify` by enumerating assignments
    directly on the formulas (no CNF, no solver).  Returns ``None`` when
    more than ``limit`` letters are involved."""
    letters = sorted(atoms(phi) | atoms(psi), key=repr)
    if len(letters) > limit:
        return None
    phi_sat = ent_counter = con_counter = False
    for values in itertools.product((False, True), repeat=len(letters)):
        assignment = dict(zip(letters, values))
        p = evaluate(phi, assignment)
        if not p:
            continue
        phi_sat = True
        q = evaluate(psi, assignment)
        ent_counter |= not q
        con_counter |= q
    if not phi_sat:
        return Verdict(VerdictLabel.CONTRADICTION, True)
    if not ent_counter:
        return Verdict(VerdictLabel.ENTAILMENT)
    if not con_counter:
        return Verdict(VerdictLabel.CONTRADICTION)
    return Verdict(VerdictLabel.NEUTRAL)
