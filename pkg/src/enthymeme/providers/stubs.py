"""In-process providers backed by fixture tables.

Fixture file (JSON)::

    {
      "schema": 1,
      "embed":    {"dim": 64, "seed": 0,
                   "vectors": {"<text>": [0.1, ...] | {"<index>": value, ...}}},
      "nli":      {"[\\"<premise>\\", \\"<hypothesis>\\"]": {"ent": 0, "con": 85, "neu": 15}},
      "generate": {"[\\"<premise>\\", \\"<claim>\\", <steps>, \\"<kind>\\"]":
                       {"sentences": [...]} | {"completion": "..."}},
      "parse":    {"<sentence>": "<penman>"}
    }

Keys of ``nli`` and ``generate`` are :func:`fixture_key` encodings of
the inputs.  Embedding vectors may be dense lists or sparse
``{index: value}`` maps; both are zero-padded to ``dim``.  Texts with no
recorded vector get a unit vector drawn from a generator seeded by a
SHA-256 hash of ``seed`` and the text.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .base import (
    GenerationRequest,
    NliScores,
    ProviderUnavailable,
    Providers,
    require_text,
)
from .generation import select_chain

DEFAULT_DIM = 64
NEUTRAL_DEFAULT = NliScores(0.0, 0.0, 100.0)


def fixture_key(*parts: object) -> str:
    return json.dumps(list(parts), ensure_ascii=False, separators=(", ", ": "))


def hash_vector(text: str, dim: int = DEFAULT_DIM, seed: int = 0) -> np.ndarray:
    digest = hashlib.sha256(f"{seed}\x1f{text}".encode("utf-8")).digest()
    rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:16], "big")))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _dense(raw: Any, dim: int) -> np.ndarray:
    vec = np.zeros(dim)
    if isinstance(raw, Mapping):
        for k, v in raw.items():
            vec[int(k)] = float(v)
    else:
        values = [float(x) for x in raw]
        if len(values) > dim:
            raise ValueError(f"fixture vector has {len(values)} entries, dimension is {dim}")
        vec[: len(values)] = values
    if not np.any(vec):
        raise ValueError("fixture vectors must be non-zero")
    return vec


@dataclass
class StubEmbedder:
    vectors: dict[str, Any] = field(default_factory=dict)
    dim: int = DEFAULT_DIM
    seed: int = 0
    provider_id: str = "stub-embed"

    def __post_init__(self) -> None:
        self._table = {text: _dense(raw, self.dim) for text, raw in self.vectors.items()}

    def embed(self, text: str) -> np.ndarray:
        require_text(text)
        if text in self._table:
            return self._table[text].copy()
        return hash_vector(text, self.dim, self.seed)


@dataclass
class StubNli:
    table: dict[tuple[str, str], NliScores] = field(default_factory=dict)
    default: NliScores = NEUTRAL_DEFAULT
    provider_id: str = "stub-nli"

    def nli(self, premise: str, hypothesis: str) -> NliScores:
        require_text(premise, "premise")
        require_text(hypothesis, "hypothesis")
        return self.table.get((premise, hypothesis), self.default)


@dataclass
class StubGenerator:
    """Replays recorded responses keyed by (premise, claim, steps, kind).

    A recorded entry is either the final sentence list or a raw completion,
    which goes through the same parser as live responses.
    """

    table: dict[tuple[str, str, int, str], dict[str, Any]] = field(default_factory=dict)
    provider_id: str = "stub-generate"

    def generate(self, request: GenerationRequest) -> list[str]:
        key = (request.premise, request.claim, request.steps, request.kind.value)
        if key not in self.table:
            raise ProviderUnavailable(f"no recorded generation for {key!r}")
        entry = self.table[key]
        if "completion" in entry:
            return select_chain(entry["completion"], request)
        return list(entry["sentences"])


@dataclass
class StubParser:
    table: dict[str, str] = field(default_factory=dict)
    provider_id: str = "stub-parse"

    def parse(self, sentence: str) -> str:
        require_text(sentence, "sentence")
        try:
            return self.table[sentence]
        except KeyError:
            raise ProviderUnavailable(f"no recorded AMR for {sentence!r}") from None


def stub_providers(fixtures: Mapping[str, Any] | None = None) -> Providers:
    """Build stub providers from a fixture mapping (see module docstring)."""
    fixtures = fixtures or {}
    emb = fixtures.get("embed", {})
    nli = {
        tuple(json.loads(k)): NliScores(v["ent"], v["con"], v["neu"])
        for k, v in fixtures.get("nli", {}).items()
    }
    gen = {}
    for k, v in fixtures.get("generate", {}).items():
        premise, claim, steps, kind = json.loads(k)
        gen[(premise, claim, int(steps), kind)] = v
    return Providers(
        embedder=StubEmbedder(dict(emb.get("vectors", {})), int(emb.get("dim", DEFAULT_DIM)),
                              int(emb.get("seed", 0))),
        nli=StubNli(nli),
        generator=StubGenerator(gen),
        parser=StubParser(dict(fixtures.get("parse", {}))),
    )


def load_fixtures(path: str | os.PathLike) -> dict[str, Any]:
    with open(Path(path), encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("schema", 1) != 1:
        raise ValueError(f"unsupported fixture schema {data.get('schema')!r}")
    return data


def merge_fixtures(*sets: Mapping[str, Any]) -> dict[str, Any]:
    """Union of fixture sets; later sets win on key clashes."""
    out: dict[str, Any] = {"schema": 1, "embed": {"vectors": {}}, "nli": {}, "generate": {}, "parse": {}}
    for s in sets:
        emb = s.get("embed", {})
        for k in ("dim", "seed"):
            if k in emb:
                out["embed"][k] = emb[k]
        out["embed"]["vectors"].update(emb.get("vectors", {}))
        for section in ("nli", "generate", "parse"):
            out[section].update(s.get(section, {}))
    return out
