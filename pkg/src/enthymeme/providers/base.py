"""Shared types for the neural back ends: embeddings, NLI, generation."""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np


class ProviderError(RuntimeError):
    """Base class for failures talking to a model back end."""


class ProviderUnavailable(ProviderError):
    pass


class MalformedResponse(ProviderError):
    pass


class OutOfRangeScore(MalformedResponse):
    pass


class UnparseableResponse(MalformedResponse):
    """Generated text did not follow the mandated output format."""


class DimensionMismatch(ValueError):
    pass


class ZeroVector(ValueError):
    pass


def cosine_similarity(v1: Sequence[float], v2: Sequence[float]) -> float:
    a = np.asarray(v1, dtype=float)
    b = np.asarray(v2, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    value = float(np.dot(a, b)) / (na * nb)
    return min(1.0, max(-1.0, value))


class NliOutcome(str, enum.Enum):
    ENT = "Ent"
    CON = "Con"
    NEU = "Neu"


@dataclass(frozen=True)
class NliScores:
    """Entailment / contradiction / neutral scores on a 0-100 scale."""

    ent: float
    con: float
    neu: float

    def __post_init__(self) -> None:
        for name in ("ent", "con", "neu"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 100.0):
                raise OutOfRangeScore(f"NLI {name} score {v!r} outside [0, 100]")

    def as_dict(self) -> dict[str, float]:
        return {"ent": self.ent, "con": self.con, "neu": self.neu}


def nli_label(scores: NliScores, seed: int = 0) -> NliOutcome:
    """Arg-max outcome; ties are broken by a pseudo-random choice that
    depends only on ``(scores, seed)``."""
    pairs = [(NliOutcome.ENT, scores.ent), (NliOutcome.CON, scores.con), (NliOutcome.NEU, scores.neu)]
    best = max(v for _, v in pairs)
    winners = [o for o, v in pairs if v == best]
    if len(winners) == 1:
        return winners[0]
    rng = random.Random(f"{seed}|{scores.ent!r}|{scores.con!r}|{scores.neu!r}")
    return rng.choice(winners)


class PremiseKind(str, enum.Enum):
    HELPFUL = "helpful"
    UNHELPFUL = "unhelpful"


@dataclass(frozen=True)
class GenerationRequest:
    premise: str
    claim: str
    steps: int
    kind: PremiseKind = PremiseKind.HELPFUL

    def __post_init__(self) -> None:
        if self.steps not in (1, 2, 3):
            raise ValueError(f"steps must be 1, 2 or 3, got {self.steps!r}")
        if not self.premise.strip() or not self.claim.strip():
            raise ValueError("premise and claim must be non-empty")
        object.__setattr__(self, "kind", PremiseKind(self.kind))


class Embedder(Protocol):
    provider_id: str

    def embed(self, text: str) -> np.ndarray: ...


class NliModel(Protocol):
    provider_id: str

    def nli(self, premise: str, hypothesis: str) -> NliScores: ...


class PremiseGenerator(Protocol):
    provider_id: str

    def generate(self, request: GenerationRequest) -> list[str]: ...


class AmrParser(Protocol):
    provider_id: str

    def parse(self, sentence: str) -> str: ...


@dataclass
class Providers:
    """The set of back ends a pipeline run talks to.  Any may be ``None``
    when the run does not need it (e.g. no parser when PENMAN is bundled)."""

    embedder: Embedder | None = None
    nli: NliModel | None = None
    generator: PremiseGenerator | None = None
    parser: AmrParser | None = None


def require_text(text: str, what: str = "text") -> str:
    if not isinstance(text, str) or not text.strip():
        raise ValueError(f"{what} must be a non-empty string")
    return text
