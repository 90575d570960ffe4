from .base import (
    AmrParser,
    DimensionMismatch,
    Embedder,
    GenerationRequest,
    MalformedResponse,
    NliModel,
    NliOutcome,
    NliScores,
    OutOfRangeScore,
    PremiseGenerator,
    PremiseKind,
    ProviderError,
    ProviderUnavailable,
    Providers,
    UnparseableResponse,
    ZeroVector,
    cosine_similarity,
    nli_label,
)
from .cache import DiskCache, make_key
from .generation import PROMPT_TEMPLATE, build_prompt, parse_completion
from .http import HttpEmbedder, HttpGenerator, HttpNli, HttpParser, with_cache
from .stubs import (
    StubEmbedder,
    StubGenerator,
    StubNli,
    StubParser,
    fixture_key,
    hash_vector,
    load_fixtures,
    merge_fixtures,
    stub_providers,
)

__all__ = [name for name in dir() if not name.startswith("_")]
