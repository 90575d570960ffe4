"""Decoding one binary instance: parse, ground, relax, reason."""

from __future__ import annotations

import logging
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from ..amr import parse_penman
from ..logic import Formula, conj, graph_to_formula, to_dimacs, to_text
from ..providers.base import ProviderError, ProviderUnavailable, Providers
from ..reason import Verdict, VerdictLabel, classify
from ..relax import (
    PairScores,
    TemplateRegistry,
    build_mapping,
    default_registry,
    relations_from_scores,
    score_pairs,
    translate,
)
from .dataset import BinaryInstance, DataError, Gold

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    tau_m: float = 0.6
    tau_c: float = 80.0
    step_type: str = "original"
    seed: int = 0
    compound_constants: bool = False
    drop_conflicts: bool = False
    workers: int = 1
    provider_workers: int = 4
    registry: TemplateRegistry | None = None
    dimacs_dir: str | None = None
    endpoints: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau_m <= 1.0:
            raise ValueError(f"tau_m must lie in [0, 1], got {self.tau_m}")
        if not 0.0 <= self.tau_c <= 100.0:
            raise ValueError(f"tau_c must lie in [0, 100], got {self.tau_c}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def templates(self) -> TemplateRegistry:
        if self.registry is None:
            self.registry = default_registry()
        return self.registry


@dataclass
class Prepared:
    """Everything about an instance that does not depend on thresholds."""

    instance: BinaryInstance
    penman: dict[str, str] = field(default_factory=dict)
    premise_formulas: list[Formula] = field(default_factory=list)
    claim_formula: Formula | None = None
    scores: PairScores | None = None
    error: str | None = None
    error_kind: str | None = None  # "provider" | "data"

    @property
    def phi(self) -> Formula:
        return conj(self.premise_formulas)


@dataclass
class Decision:
    instance: BinaryInstance
    predicted: Gold | None
    verdict: Verdict | None
    trace: dict[str, Any]

    @property
    def errored(self) -> bool:
        return self.predicted is None


def _penman_for(sentence: str, instance: BinaryInstance, providers: Providers) -> str:
    if sentence in instance.amr:
        return instance.amr[sentence]
    if providers.parser is None:
        raise DataError(f"no AMR for {sentence!r} and no parser configured")
    return providers.parser.parse(sentence)


def prepare_instance(instance: BinaryInstance, config: RunConfig, providers: Providers) -> Prepared:
    """Parse and ground every sentence and collect raw provider scores.

    Stage failures are recorded on the result instead of raised.
    """
    prep = Prepared(instance)
    try:
        formulas = []
        for sentence in instance.sentences():
            text = _penman_for(sentence, instance, providers)
            prep.penman[sentence] = text
            formulas.append(graph_to_formula(parse_penman(text), config.compound_constants))
        prep.premise_formulas = formulas[:-1]
        prep.claim_formula = formulas[-1]
        if providers.embedder is None:
            raise ProviderUnavailable("no embedding provider configured")
        if providers.nli is None:
            raise ProviderUnavailable("no NLI provider configured")
        prep.scores = score_pairs(prep.phi, prep.claim_formula, config.templates(),
                                  providers.embedder, providers.nli, config.provider_workers)
    except ProviderError as exc:
        prep.error, prep.error_kind = f"{type(exc).__name__}: {exc}", "provider"
    except (ValueError, KeyError) as exc:
        prep.error, prep.error_kind = f"{type(exc).__name__}: {exc}", "data"
    return prep


def _safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text)


def decide(prep: Prepared, tau_m: float, tau_c: float, seed: int = 0,
           drop_conflicts: bool = False, dimacs_dir: str | os.PathLike | None = None) -> Decision:
    """Apply thresholds to prepared scores and run the SAT checks."""
    inst = prep.instance
    trace: dict[str, Any] = {
        "id": inst.id,
        "step_type": inst.step_type,
        "gold": inst.gold.value,
        "tau_m": tau_m,
        "tau_c": tau_c,
        "sentences": {"premise": inst.premise, "implicit": list(inst.implicit), "claim": inst.claim},
        "amr": dict(prep.penman),
    }
    if prep.error is not None:
        trace.update(predicted=None, verdict=None, error=prep.error, error_kind=prep.error_kind)
        return Decision(inst, None, None, trace)
    assert prep.claim_formula is not None and prep.scores is not None
    phi, psi = prep.phi, prep.claim_formula
    trace["formulas"] = {
        "premises": [to_text(f) for f in prep.premise_formulas],
        "phi": to_text(phi),
        "psi": to_text(psi),
    }
    try:
        relations = relations_from_scores(prep.scores, tau_m, tau_c, seed)
        mapping = build_mapping([phi, psi], relations, drop_conflicts)
        abstract_phi, abstract_psi = translate(phi, mapping), translate(psi, mapping)
    except (ValueError, KeyError) as exc:
        trace.update(predicted=None, verdict=None, error=f"{type(exc).__name__}: {exc}", error_kind="data")
        return Decision(inst, None, None, trace)
    verdict = classify(abstract_phi, abstract_psi)
    predicted = Gold.ENTAILMENT if verdict.label is VerdictLabel.ENTAILMENT else Gold.NON_ENTAILMENT
    trace.update(
        relations=relations.as_dict(),
        dropped_contradictions=[c.as_dict() for c in mapping.dropped],
        mapping=mapping.as_dict(),
        abstract={"phi": to_text(abstract_phi), "psi": to_text(abstract_psi)},
        cnf={name: to_dimacs(cnf) for name, cnf in verdict.cnfs.items()},
        verdict=verdict.label.value,
        premise_inconsistent=verdict.premise_inconsistent,
        predicted=predicted.value,
        error=None,
    )
    if dimacs_dir is not None:
        out = Path(dimacs_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in trace["cnf"].items():
            (out / f"{_safe_name(inst.id)}.{name}.cnf").write_text(text, encoding="utf-8")
    return Decision(inst, predicted, verdict, trace)


def run_instance(instance: BinaryInstance, config: RunConfig, providers: Providers) -> Decision:
    prep = prepare_instance(instance, config, providers)
    return decide(prep, config.tau_m, config.tau_c, config.seed, config.drop_conflicts, config.dimacs_dir)


def prepare_all(instances: Sequence[BinaryInstance], config: RunConfig, providers: Providers) -> list[Prepared]:
    """Prepare in parallel; results keep input order."""
    if config.workers == 1:
        return [prepare_instance(i, config, providers) for i in instances]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(lambda i: prepare_instance(i, config, providers), instances))


def decode_all(instances: Iterable[BinaryInstance], config: RunConfig, providers: Providers) -> list[Decision]:
    instances = list(instances)
    prepared = prepare_all(instances, config, providers)
    return [decide(p, config.tau_m, config.tau_c, config.seed, config.drop_conflicts, config.dimacs_dir)
            for p in prepared]



__all__ = [
    "RunConfig",
    "Prepared",
    "Decision",
    "prepare_instance",
    "decide",
    "run_instance",
    "prepare_all",
    "decode_all",
]
