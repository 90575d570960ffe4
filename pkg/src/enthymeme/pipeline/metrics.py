"""Binary classification metrics.  Class 1 is entailment, class 0 non-entailment."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

from .dataset import Gold


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def f1(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall else 0.0


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    tn: int
    errored: int = 0
    excluded: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return _ratio(self.tp + self.tn, self.total)

    @property
    def precision_1(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall_1(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1_1(self) -> float:
        return f1(self.precision_1, self.recall_1)

    @property
    def precision_0(self) -> float:
        return _ratio(self.tn, self.tn + self.fn)

    @property
    def recall_0(self) -> float:
        return _ratio(self.tn, self.tn + self.fp)

    @property
    def f1_0(self) -> float:
        return f1(self.precision_0, self.recall_0)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["n"] = self.total + self.excluded
        for name in ("accuracy", "precision_0", "recall_0", "f1_0", "precision_1", "recall_1", "f1_1"):
            out[name] = getattr(self, name)
        return out


def confusion(pairs: Iterable[tuple[Gold, Gold | None]], exclude_errored: bool = False) -> EvalReport:
    """Tally (gold, predicted) pairs.  ``predicted=None`` marks an errored
    instance, which counts as a wrong prediction unless excluded."""
    tp = fp = fn = tn = errored = excluded = 0
    for gold, predicted in pairs:
        if predicted is None:
            errored += 1
            if exclude_errored:
                excluded += 1
                continue
            predicted = Gold.NON_ENTAILMENT if gold is Gold.ENTAILMENT else Gold.ENTAILMENT
        if gold is Gold.ENTAILMENT:
            if predicted is Gold.ENTAILMENT:
                tp += 1
            else:
                fn += 1
        elif predicted is Gold.ENTAILMENT:
            fp += 1
        else:
            tn += 1
    return EvalReport(tp, fp, fn, tn, errored, excluded)


def report_from_decisions(decisions, exclude_errored: bool = False) -> EvalReport:
    return confusion(((d.instance.gold, d.predicted) for d in decisions), exclude_errored)


def evaluate(instances, config, providers, exclude_errored: bool = False) -> EvalReport:
    """Decode every instance and score the predictions."""
    from .decode import decode_all

    return report_from_decisions(decode_all(instances, config, providers), exclude_errored)
