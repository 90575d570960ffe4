"""Dataset items, loaders for ARCT / ANLI / JSONL, augmentation and binarization.

Custom JSONL schema (one object per line)::

    {"schema": 1, "id": "...", "premise": "...", "claim": "...",
     "helpful":   {"original": ["..."], "1": ["..."], "2": [..., ...], "3": [...]},
     "unhelpful": {...same keys...},
     "amr": {"<sentence>": "<penman>", ...},
     "source": "custom"}

Only ``id``, ``premise`` and ``claim`` are required.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

from ..providers.base import GenerationRequest, PremiseGenerator, PremiseKind, ProviderError

log = logging.getLogger(__name__)

STEP_TYPES = ("none", "original", "1", "2", "3")


class DataError(ValueError):
    pass


class UnknownFormat(DataError):
    pass


class MissingSteps(DataError):
    pass


@dataclass(frozen=True)
class SchemaViolation:
    item_id: str
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line} ({self.item_id}): {self.message}"


class Gold(str, enum.Enum):
    ENTAILMENT = "Entailment"
    NON_ENTAILMENT = "NonEntailment"


@dataclass
class DatasetItem:
    id: str
    premise: str
    claim: str
    helpful: dict[str, list[str]] = field(default_factory=dict)
    unhelpful: dict[str, list[str]] = field(default_factory=dict)
    amr: dict[str, str] = field(default_factory=dict)
    source: str = "custom"
    flags: list[str] = field(default_factory=list)

    def check(self) -> list[str]:
        problems = []
        for name in ("id", "premise", "claim"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                problems.append(f"{name} is missing or empty")
        for side in ("helpful", "unhelpful"):
            for key, sentences in getattr(self, side).items():
                if key not in ("original", "1", "2", "3"):
                    problems.append(f"{side} has unknown step key {key!r}")
                    continue
                want = 1 if key == "original" else int(key)
                if not isinstance(sentences, list) or len(sentences) != want or not all(
                    isinstance(s, str) and s.strip() for s in sentences
                ):
                    problems.append(f"{side}[{key}] must hold exactly {want} non-empty sentence(s)")
        return problems

    def to_json(self) -> dict:
        out = {"schema": 1, "id": self.id, "premise": self.premise, "claim": self.claim,
               "helpful": self.helpful, "unhelpful": self.unhelpful, "source": self.source}
        if self.amr:
            out["amr"] = self.amr
        if self.flags:
            out["flags"] = self.flags
        return out


@dataclass(frozen=True)
class BinaryInstance:
    id: str
    premise: str
    implicit: tuple[str, ...]
    claim: str
    gold: Gold
    step_type: str = "none"
    amr: dict[str, str] = field(default_factory=dict, compare=False, hash=False)

    def sentences(self) -> list[str]:
        return [self.premise, *self.implicit, self.claim]


@dataclass
class Dataset:
    items: list[DatasetItem]
    violations: list[SchemaViolation] = field(default_factory=list)

    def __iter__(self) -> Iterator[DatasetItem]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i: int) -> DatasetItem:
        return self.items[i]


# -- loaders -----------------------------------------------------------------


def _item_from_json(obj: dict) -> DatasetItem:
    def steps(raw: object) -> dict[str, list[str]]:
        if raw is None:
            return {}
        if not isinstance(raw, dict):
            raise DataError("step maps must be JSON objects")
        return {str(k): v for k, v in raw.items()}

    if obj.get("schema", 1) != 1:
        raise DataError(f"unsupported schema {obj.get('schema')!r}")
    return DatasetItem(
        id=obj.get("id", ""),
        premise=obj.get("premise", ""),
        claim=obj.get("claim", ""),
        helpful=steps(obj.get("helpful")),
        unhelpful=steps(obj.get("unhelpful")),
        amr=dict(obj.get("amr") or {}),
        source=obj.get("source", "custom"),
        flags=list(obj.get("flags") or []),
    )


def _load_jsonl(path: Path) -> Iterator[tuple[int, str, DatasetItem | str]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise DataError("line is not a JSON object")
                yield lineno, str(obj.get("id", f"line{lineno}")), _item_from_json(obj)
            except (ValueError, DataError) as exc:
                yield lineno, f"line{lineno}", str(exc)


def _load_arct(path: Path) -> Iterator[tuple[int, str, DatasetItem | str]]:
    # ARCT TSV: #id, warrant0, warrant1, correctLabelW0orW1, reason, claim, ...
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        for lineno, row in enumerate(reader, 2):
            item_id = row.get("#id") or row.get("id") or f"line{lineno}"
            try:
                label = int(row["correctLabelW0orW1"])
                warrants = [row["warrant0"], row["warrant1"]]
                if label not in (0, 1):
                    raise ValueError
            except (KeyError, TypeError, ValueError):
                yield lineno, item_id, "needs warrant0, warrant1 and correctLabelW0orW1 in {0, 1}"
                continue
            yield lineno, item_id, DatasetItem(
                id=item_id,
                premise=(row.get("reason") or "").strip(),
                claim=(row.get("claim") or "").strip(),
                helpful={"original": [warrants[label].strip()]},
                unhelpful={"original": [warrants[1 - label].strip()]},
                source="ARCT",
            )


def _anli_labels(path: Path) -> list[str] | None:
    for candidate in (path.with_name(path.stem + "-labels.lst"), path.with_suffix(".labels")):
        if candidate.exists():
            return candidate.read_text(encoding="utf-8").split()
    return None


def _load_anli(path: Path) -> Iterator[tuple[int, str, DatasetItem | str]]:
    # αNLI: obs1, obs2, hyp1, hyp2 per line; label inline or in "<stem>-labels.lst"
    labels = _anli_labels(path)
    with open(path, encoding="utf-8") as fh:
        for index, (lineno, line) in enumerate((n, l) for n, l in enumerate(fh, 1) if l.strip()):
            try:
                obj = json.loads(line)
            except ValueError as exc:
                yield lineno, f"line{lineno}", str(exc)
                continue
            item_id = str(obj.get("story_id") or obj.get("id") or f"line{lineno}")
            label = obj.get("label", labels[index] if labels and index < len(labels) else None)
            try:
                label = int(label)  # type: ignore[arg-type]
                if label not in (1, 2):
                    raise ValueError
                hyps = [obj["hyp1"], obj["hyp2"]]
            except (KeyError, TypeError, ValueError):
                yield lineno, item_id, "needs hyp1, hyp2 and a label in {1, 2}"
                continue
            yield lineno, item_id, DatasetItem(
                id=item_id,
                premise=(obj.get("obs1") or "").strip(),
                claim=(obj.get("obs2") or "").strip(),
                helpful={"original": [hyps[label - 1].strip()]},
                unhelpful={"original": [hyps[2 - label].strip()]},
                source="ANLI",
            )


_LOADERS = {"jsonl": _load_jsonl, "arct": _load_arct, "anli": _load_anli}


def load_dataset(path: str | os.PathLike, format: str = "jsonl") -> Dataset:
    """Read and validate items.  Bad lines are collected as
    :class:`SchemaViolation` records rather than aborting the load."""
    loader = _LOADERS.get(format.lower())
    if loader is None:
        raise UnknownFormat(f"unknown dataset format {format!r}; expected one of {sorted(_LOADERS)}")
    items, violations = [], []
    for lineno, item_id, result in loader(Path(path)):
        if isinstance(result, str):
            violations.append(SchemaViolation(item_id, lineno, result))
            continue
        problems = result.check()
        if problems:
            violations.extend(SchemaViolation(item_id, lineno, p) for p in problems)
            continue
        items.append(result)
    for v in violations:
        log.warning("skipping invalid item: %s", v)
    return Dataset(items, violations)


def write_jsonl(items: Iterable[DatasetItem], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


# -- augmentation ------------------------------------------------------------


def augment(items: Iterable[DatasetItem], generator: PremiseGenerator,
            steps: Iterable[int] = (1, 2, 3)) -> list[DatasetItem]:
    """Attach generated helpful and unhelpful chains.

    A failed generation leaves that list absent and records a flag such as
    ``"generation-failed:2:unhelpful"``; binarizing that step type then
    raises :class:`MissingSteps`, so the item is reported, not dropped.
    """
    out = []
    for item in items:
        helpful, unhelpful = dict(item.helpful), dict(item.unhelpful)
        flags = list(item.flags)
        for n in steps:
            for kind, target in ((PremiseKind.HELPFUL, helpful), (PremiseKind.UNHELPFUL, unhelpful)):
                try:
                    sentences = generator.generate(GenerationRequest(item.premise, item.claim, n, kind))
                    if len(sentences) != n:
                        raise DataError(f"generator returned {len(sentences)} sentences for {n} steps")
                except (ProviderError, DataError) as exc:
                    log.warning("generation failed for %s (%d steps, %s): %s", item.id, n, kind.value, exc)
                    flags.append(f"generation-failed:{n}:{kind.value}")
                    target.pop(str(n), None)
                    continue
                target[str(n)] = list(sentences)
        out.append(replace(item, helpful=helpful, unhelpful=unhelpful, flags=flags))
    return out


# -- binarization ------------------------------------------------------------


def binarize(item: DatasetItem, step_type: str) -> list[BinaryInstance]:
    """Split an item into a helpful (Entailment) and an unhelpful
    (NonEntailment) instance; ``none`` gives one premise-only instance."""
    if step_type not in STEP_TYPES:
        raise ValueError(f"step type must be one of {STEP_TYPES}, got {step_type!r}")
    if step_type == "none":
        return [BinaryInstance(f"{item.id}:none", item.premise, (), item.claim, Gold.ENTAILMENT, "none", item.amr)]
    out = []
    for side, gold in (("helpful", Gold.ENTAILMENT), ("unhelpful", Gold.NON_ENTAILMENT)):
        chain = getattr(item, side).get(step_type)
        if not chain:
            raise MissingSteps(f"item {item.id!r} has no {side} premises for step type {step_type!r}")
        out.append(BinaryInstance(f"{item.id}:{step_type}:{side}", item.premise, tuple(chain),
                                  item.claim, gold, step_type, item.amr))
    return out
