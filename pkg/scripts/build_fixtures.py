"""Regenerate the bundled fixture data.

Writes, relative to the repository root:

* src/enthymeme/data/worked_examples.json  worked examples (walking tiger etc.)
* src/enthymeme/data/spiderweb.json         the torn-spiderweb argument graph
* src/enthymeme/data/minicorpus.jsonl     ten-item corpus with PENMAN for every sentence
* src/enthymeme/data/minicorpus_fixtures.json
* tests/data/minicorpus_plan.json         per-instance scores, used by an independent oracle

Run with ``python3 scripts/build_fixtures.py``.  The output is deterministic.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

from enthymeme.logic import AmrAtom
from enthymeme.providers import cosine_similarity, fixture_key
from enthymeme.relax import default_registry, instantiate

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "enthymeme" / "data"
REGISTRY = default_registry()


def verbalize(role: str, left: str, right: str) -> str:
    return instantiate(AmrAtom(role, left, right), REGISTRY)


def exact_pair(target: float) -> tuple[list[float], list[float]]:
    """Two vectors whose cosine_similarity is exactly ``target`` in float arithmetic."""
    a = [1.0, 0.0]
    s = math.sqrt(1.0 - target * target)
    for _ in range(10_000):
        got = cosine_similarity(a, [target, s])
        if got == target:
            return a, [target, s]
        s = math.nextafter(s, math.inf if got > target else -math.inf)
    raise RuntimeError(f"no exact pair for {target}")


def rotated(base: int, own: int, cos: float) -> dict[str, float]:
    """Sparse unit vector with cosine ``cos`` to basis vector ``base``."""
    return {str(base): cos, str(own): math.sqrt(1.0 - cos * cos)}


def dump(path: Path, obj: object) -> None:
    path.write_text(json.dumps(obj, ensure_ascii=False, indent=1, sort_keys=True) + "\n", encoding="utf-8")


# -- worked examples ----------------------------------------------------------


def worked_examples() -> dict:
    walk = verbalize("arg0", "walk", "tiger")
    move = verbalize("arg0", "move", "tiger")
    sleep = verbalize("arg0", "sleep", "tiger")
    walk_loc = verbalize("location", "walk", "cage")
    sleep_loc = verbalize("location", "sleep", "cage")
    v_walk, v_move = exact_pair(0.8483)
    nli = {}
    # Claim sentence first is the order the pipeline uses; the reverse order
    # is recorded as well so either reading of the example gives the same scores.
    for claim_s, premise_s, con in ((sleep, walk, 85), (sleep_loc, walk_loc, 82)):
        scores = {"ent": 5, "con": con, "neu": 100 - 5 - con}
        nli[fixture_key(claim_s, premise_s)] = scores
        nli[fixture_key(premise_s, claim_s)] = scores
    return {
        "schema": 1,
        "embed": {"dim": 64, "seed": 0, "vectors": {walk: v_walk, move: v_move}},
        "nli": nli,
        "cases": {
            "tiger_walking": "(w / walk-01 :arg0 (t / tiger) :location (c / cage))",
            "tiger_moving": "(m / move-01 :arg0 (t / tiger))",
            "tiger_sleeping": "(s / sleep-01 :arg0 (t / tiger) :location (c / cage))",
            "red_fast_car": "(c / car :arg1 (r / red) :arg2 (f / fast))",
            "red_car": "(c / car :arg1 (r / red))",
        },
    }


# -- torn spiderweb -------------------------------------------------------------


def spiderweb() -> dict:
    sentences = {
        "premise": "The spiderweb is torn.",
        "A": "Torn webs result from trapped prey escaping.",
        "B": "Small insect fled.",
        "C": "Wind tears a spiderweb.",
        "claim": "A large insect escaped recently.",
    }
    amr = {
        sentences["premise"]: "(t / tear-01 :arg1 (s / spiderweb))",
        sentences["A"]: "(r / result-01 :arg1 (e / escape-01 :arg0 (p / prey :arg1-of (t / trap-01)))"
                        " :arg2 (w / web :arg1-of (t2 / tear-01)))",
        sentences["B"]: "(f / flee-01 :arg0 (i / insect :mod (s / small)))",
        sentences["C"]: "(t / tear-01 :arg1 (s / spiderweb) :arg0-of (w / wing))",
        sentences["claim"]: "(e / escape-01 :arg0 (i / insect :mod (l / large)) :time (r / recent))",
    }
    prey = verbalize("arg0", "escape", "prey")
    large = verbalize("arg0", "escape", "large insect")
    recent = verbalize("time", "escape", "recent")
    small = verbalize("arg0", "flee", "small insect")
    return {
        "schema": 1,
        "embed": {"dim": 64, "seed": 0, "vectors": {
            prey: {"0": 1.0},
            large: rotated(0, 1, 0.9),
            recent: rotated(0, 2, 0.7),
        }},
        "nli": {fixture_key(large, small): {"ent": 2, "con": 88, "neu": 10}},
        "scenario": {
            "premise": sentences["premise"],
            "implicit": [sentences["A"], sentences["B"], sentences["C"]],
            "claim": sentences["claim"],
            "amr": amr,
            "compound_constants": True,
            "tau_m": 0.6,
            "tau_c": 80.0,
            "expected": {"premise": "Neutral", "combined_1": "Support",
                         "combined_2": "Contradict", "combined_3": "Neutral"},
        },
    }


# -- mini corpus ------------------------------------------------------------------

# (lemma, past tense)
VERBS = [
    ("chase", "chased"), ("climb", "climbed"), ("cross", "crossed"), ("dig", "dug"), ("drift", "drifted"),
    ("explore", "explored"), ("fetch", "fetched"), ("gather", "gathered"), ("guard", "guarded"),
    ("hide", "hid"), ("hunt", "hunted"), ("jump", "jumped"), ("land", "landed"), ("leave", "left"),
    ("mend", "mended"), ("nest", "nested"), ("paint", "painted"), ("plant", "planted"), ("pull", "pulled"),
    ("rest", "rested"), ("roam", "roamed"), ("sail", "sailed"), ("scan", "scanned"), ("sing", "sang"),
    ("sort", "sorted"), ("stack", "stacked"), ("swim", "swam"), ("tend", "tended"), ("travel", "travelled"),
    ("wander", "wandered"), ("wash", "washed"), ("watch", "watched"), ("weave", "wove"), ("whistle", "whistled"),
]
NOUNS = [
    "badger", "baker", "beaver", "captain", "crane", "crow", "diver", "falcon", "farmer", "ferret",
    "fisher", "fox", "gardener", "goat", "heron", "hiker", "lynx", "mason", "miner", "otter",
    "owl", "painter", "pilot", "rabbit", "raven", "sailor", "scout", "seal", "shepherd", "sparrow",
    "squirrel", "stork", "tailor", "weaver", "wolf", "wren",
]
PLACES = ["barn", "beach", "bridge", "canyon", "cellar", "field", "forest", "garden", "harbor",
          "island", "lake", "market", "meadow", "orchard", "river", "valley"]

# tau_m grid points are multiples of 0.05; none of these sit on one.
HELPFUL_SIMS = [0.52, 0.57, 0.62, 0.66, 0.71, 0.73, 0.77, 0.79, 0.83, 0.58, 0.68, 0.64, 0.76]
STEP_LENGTHS = {"original": 1, "1": 1, "2": 2, "3": 3}


class Vocab:
    """Hands out (verb, noun) pairs that never repeat, in a fixed shuffled order."""

    def __init__(self, seed: int = 7) -> None:
        self.pairs = [(v, n) for v in VERBS for n in NOUNS]
        random.Random(seed).shuffle(self.pairs)
        self.k = 0

    def pair(self) -> tuple[tuple[str, str], str]:
        self.k += 1
        return self.pairs[self.k - 1]


def minicorpus() -> tuple[list[dict], dict, dict]:
    vocab = Vocab()
    vectors: dict[str, dict[str, float]] = {}
    nli: dict[str, dict] = {}
    basis = iter(range(10_000))
    items, plan = [], {}

    def sentence(verb, noun, place=None):
        text = f"The {noun} {verb[1]}" + (f" in the {place}." if place else ".")
        penman = f"(v / {verb[0]}-01 :arg0 (n / {noun})" + (f" :location (p / {place}))" if place else ")")
        atoms = [("arg0", verb[0], noun)] + ([("location", verb[0], place)] if place else [])
        return text, penman, [verbalize(*a) for a in atoms]

    def own_vector(text):
        if text not in vectors:
            vectors[text] = {str(next(basis)): 1.0}
        return int(next(iter(vectors[text])))

    for i in range(10):
        two_atoms = i in (3, 7)
        amr = {}

        def make(place=None):
            verb, noun = vocab.pair()
            text, penman, atom_sentences = sentence(verb, noun, place)
            amr[text] = penman
            return text, atom_sentences

        premise, p_atoms = make()
        claim, c_atoms = make(PLACES[i] if two_atoms else None)
        for s in p_atoms + c_atoms:
            own_vector(s)
        item = {"schema": 1, "id": f"mini-{i:02d}", "premise": premise, "claim": claim,
                "helpful": {}, "unhelpful": {}, "source": "custom"}
        for j, (step, length) in enumerate(STEP_LENGTHS.items()):
            for side in ("helpful", "unhelpful"):
                chain, chain_atoms = [], []
                for _ in range(length - 1):
                    text, atom_sentences = make()
                    chain.append(text)
                    chain_atoms += atom_sentences
                    for s in atom_sentences:
                        own_vector(s)
                text, last_atoms = make(PLACES[(i + j + 5) % len(PLACES)] if two_atoms else None)
                chain.append(text)
                record = {"sims": [], "con": None, "conflict": False}
                if side == "helpful":
                    sims = [HELPFUL_SIMS[(i * 3 + j) % len(HELPFUL_SIMS)],
                            HELPFUL_SIMS[(i * 5 + j + 4) % len(HELPFUL_SIMS)]][: len(c_atoms)]
                    for c_s, l_s, sim in zip(c_atoms, last_atoms, sims):
                        vectors[l_s] = rotated(own_vector(c_s), next(basis), sim)
                    record["sims"] = sims
                else:
                    kind = ("contradict", "neutral", "match", "contradict", "neutral")[(i + j) % 5]
                    if i == 9 and step == "3":
                        kind = "conflict"
                    for s in last_atoms:
                        own_vector(s)
                    if kind in ("match", "conflict"):
                        sim = 0.74 if kind == "conflict" else (0.54, 0.67, 0.78)[(i + j) % 3]
                        vectors[last_atoms[0]] = rotated(own_vector(c_atoms[0]), next(basis), sim)
                        record["sims"] = [sim] + [None] * (len(c_atoms) - 1)
                    if kind in ("contradict", "conflict"):
                        con = (85, 95, 100)[(i + j) % 3]
                        nli[fixture_key(c_atoms[0], last_atoms[0])] = {"ent": 0, "con": con, "neu": 100 - con}
                        record["con"] = con
                        record["conflict"] = kind == "conflict"
                    record["kind"] = kind
                item[side][step] = chain
                plan[f"{item['id']}:{step}:{side}"] = record
        plan[f"{item['id']}:none"] = {"sims": [], "con": None, "conflict": False}
        item["amr"] = amr
        items.append(item)
    dim = next(basis)
    fixtures = {"schema": 1, "embed": {"dim": dim, "seed": 0, "vectors": vectors}, "nli": nli}
    return items, fixtures, plan


def main() -> None:
    dump(DATA / "worked_examples.json", worked_examples())
    dump(DATA / "spiderweb.json", spiderweb())
    items, fixtures, plan = minicorpus()
    with open(DATA / "minicorpus.jsonl", "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item, ensure_ascii=False, sort_keys=True) + "\n")
    dump(DATA / "minicorpus_fixtures.json", fixtures)
    dump(ROOT / "tests" / "data" / "minicorpus_plan.json", plan)
    print(f"wrote {len(items)} items, {len(fixtures['embed']['vectors'])} vectors "
          f"(dim {fixtures['embed']['dim']}), {len(fixtures['nli'])} NLI pairs")


if __name__ == "__main__":
    main()
