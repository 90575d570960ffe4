"""Prompt construction and response parsing for implicit-premise generation."""

from __future__ import annotations

import re

from .base import GenerationRequest, PremiseKind, UnparseableResponse

PROMPT_TEMPLATE = """\
Generate two distinct chains of reasoning based on the premise and claim provided below. Follow these instructions carefully.


**Premise:** {premise}
**Claim:** {claim}


**Instructions:**
- **Helpful Chain:** Give {count} statements that represent the steps of reasoning starting from the premises and finishing with the claim (split by full stop), avoid using pronoun and repeating claim (each statement under 10 words)


- **Non-Helpful Chain:** Give {count} statements that represent the steps of reasoning starting from the premises and finishing with the neutral or contradictory of claim (split by full stop), avoid using pronoun and repeating claim (each statement under 10 words)


**Output Format:**
Your output must exactly match the following structure. Do not add any extra text, headers, or explanations.

Premise: {premise}
Claim: {claim}
Helpful: [insert helpful reasoning chain here]
Non-Helpful: [insert non-helpful reasoning chain here]

Replace the bracketed parts with your responses, ensuring each chain is a continuous sentence or phrase.
"""

_COUNT_WORDS = {1: "one", 2: "two", 3: "three"}

_LINE_RE = {
    PremiseKind.HELPFUL: re.compile(r"^\s*\**\s*Helpful\s*\**\s*:\s*\**\s*(?P<body>.*)$", re.IGNORECASE | re.MULTILINE),
    PremiseKind.UNHELPFUL: re.compile(
        r"^\s*\**\s*Non[- ]Helpful\s*\**\s*:\s*\**\s*(?P<body>.*)$", re.IGNORECASE | re.MULTILINE
    ),
}


def build_prompt(premise: str, claim: str, steps: int) -> str:
    return PROMPT_TEMPLATE.format(premise=premise, claim=claim, count=_COUNT_WORDS[steps])


def split_statements(body: str) -> list[str]:
    """Split a chain on full stops; each statement keeps its final period."""
    parts = [p.strip() for p in body.split(".")]
    return [p + "." for p in parts if p]


def parse_completion(text: str, steps: int) -> dict[PremiseKind, list[str]]:
    """Extract both chains from a model completion.

    Raises :class:`UnparseableResponse` when either line is missing or a
    chain does not hold exactly ``steps`` statements.
    """
    chains: dict[PremiseKind, list[str]] = {}
    for kind, pattern in _LINE_RE.items():
        m = pattern.search(text)
        if m is None:
            label = "Helpful" if kind is PremiseKind.HELPFUL else "Non-Helpful"
            raise UnparseableResponse(f"completion has no {label!r} line")
        statements = split_statements(m.group("body").strip().strip("*").strip())
        if len(statements) != steps:
            raise UnparseableResponse(
                f"{kind.value} chain has {len(statements)} statement(s), expected {steps}"
            )
        chains[kind] = statements
    return chains


def select_chain(text: str, request: GenerationRequest) -> list[str]:
    return parse_completion(text, request.steps)[request.kind]
