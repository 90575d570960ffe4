import random

import pytest

from enthymeme.amr import parse_penman
from enthymeme.logic import AmrAtom, And, Atom, Letter, Not, Top, conj, graph_to_formula, skeleton
from enthymeme.providers import NliScores, StubEmbedder, StubNli, stub_providers
from enthymeme.relax import (
    FALLBACK_PATTERN,
    ConflictError,
    ContradictEdge,
    MatchEdge,
    PairScores,
    RelationSet,
    Template,
    TemplateRegistry,
    UnmappedAtom,
    build_mapping,
    compute_contradicts,
    compute_matches,
    contradicts_from_scores,
    default_registry,
    instantiate,
    matches_from_scores,
    score_pairs,
    translate,
)

REG = default_registry()


def atom(text):
    role, rest = text.split("(")
    left, right = rest.rstrip(")").split(",")
    return AmrAtom(role, left, right)


def formula(*texts):
    return conj([Atom(atom(t)) for t in texts])


# -- templates ---------------------------------------------------------------------


def test_registry_has_29_roles():
    assert len(REG) == 29


@pytest.mark.parametrize("a,sentence", [
    ("arg0(play,child)", "child is the agent performing action play."),
    ("purpose(run,win)", "win is the purpose of action run."),
    ("arg1(find,key)", "key is the object involved in action find."),
    ("time(escape,recent)", "recent is when action escape takes place."),
    ("foo(a,b)", "b is the foo of a."),
    ("ARG0(play,child)", "child is the agent performing action play."),
])
def test_instantiate(a, sentence):
    assert instantiate(atom(a), REG) == sentence


def test_compound_constant_verbalized_with_space():
    assert instantiate(AmrAtom("arg0", "escape", "large insect"), REG) == \
        "large insect is the agent performing action escape."


def test_fill_is_single_pass():
    # a constant that itself looks like a placeholder is not substituted again
    assert Template("r", "[Y] then [X]").fill("[Y]", "b") == "b then [Y]"


def test_template_needs_both_placeholders():
    with pytest.raises(ValueError):
        Template("r", "[X] only")
    with pytest.raises(ValueError):
        Template("r", "[X] [X] [Y]")


def test_registry_from_text_and_fallback():
    reg = TemplateRegistry.from_text("# comment\nlocation\t[Y] hosts [X].\n")
    assert instantiate(atom("location(walk,cage)"), reg) == "cage hosts walk."
    assert "{role}" in FALLBACK_PATTERN
    assert instantiate(atom("time(a,b)"), reg) == "b is the time of a."


# -- relations on the worked examples -------------------------------------------------------------

TIGER_WALK = formula("arg0(walk,tiger)", "location(walk,cage)")
TIGER_MOVE = formula("arg0(move,tiger)")
TIGER_SLEEP = formula("arg0(sleep,tiger)", "location(sleep,cage)")


def test_example_match(worked_providers):
    edges = compute_matches(TIGER_WALK, TIGER_MOVE, 0.6, worked_providers.embedder, REG)
    assert edges == {MatchEdge(atom("arg0(move,tiger)"), atom("arg0(walk,tiger)"), 0.8483)}
    assert compute_matches(TIGER_WALK, TIGER_MOVE, 0.85, worked_providers.embedder, REG) == frozenset()


def test_example_contradictions(worked_providers):
    at80 = compute_contradicts(TIGER_WALK, TIGER_SLEEP, 80, worked_providers.nli, REG)
    assert {(str(e.claim_atom), str(e.premise_atom), e.con_score) for e in at80} == {
        ("arg0(sleep,tiger)", "arg0(walk,tiger)", 85),
        ("location(sleep,cage)", "location(walk,cage)", 82),
    }
    assert compute_contradicts(TIGER_WALK, TIGER_SLEEP, 90, worked_providers.nli, REG) == frozenset()


def test_nli_called_claim_first():
    seen = []

    class Recorder:
        provider_id = "rec"

        def nli(self, p, h):
            seen.append((p, h))
            return NliScores(0, 0, 100)

    compute_contradicts(formula("arg0(walk,tiger)"), formula("arg0(sleep,tiger)"), 80, Recorder(), REG)
    assert seen == [("tiger is the agent performing action sleep.", "tiger is the agent performing action walk.")]


def test_neutral_label_blocks_contradiction():
    c, p = atom("arg0(a,b)"), atom("arg0(c,d)")
    scores = PairScores([c], [p], {}, nli={(c, p): NliScores(5, 90, 95)})
    assert contradicts_from_scores(scores, 80) == frozenset()


def test_exact_tie_goes_to_smaller_atom():
    c = atom("arg0(z,claim)")
    p1, p2 = atom("arg0(a,first)"), atom("arg0(b,second)")
    for order in ([p1, p2], [p2, p1]):
        scores = PairScores([c], order, {}, similarity={(c, p1): 0.7, (c, p2): 0.7})
        (edge,) = matches_from_scores(scores, 0.6)
        assert edge.premise_atom == min(p1, p2)


def test_best_match_against_brute_force():
    rng = random.Random(8)
    for _ in range(300):
        claims = [AmrAtom("r", "c", str(i)) for i in range(rng.randint(1, 4))]
        prem = [AmrAtom("r", "p", str(i)) for i in range(rng.randint(1, 5))]
        sim = {(c, p): rng.choice([0.3, 0.5, 0.61, 0.7, 0.7, 0.9]) for c in claims for p in prem}
        tau = rng.choice([0.5, 0.6, 0.7])
        edges = {e.claim_atom: e for e in matches_from_scores(PairScores(claims, prem, {}, sim), tau)}
        for c in claims:
            cands = [(sim[(c, p)], p) for p in prem if sim[(c, p)] > tau]
            if not cands:
                assert c not in edges
                continue
            top = max(s for s, _ in cands)
            assert edges[c].premise_atom == min(p for s, p in cands if s == top)


def test_threshold_monotonicity():
    rng = random.Random(21)
    for _ in range(300):
        claims = [AmrAtom("r", "c", str(i)) for i in range(3)]
        prem = [AmrAtom("r", "p", str(i)) for i in range(3)]
        scores = PairScores(claims, prem, {},
                            similarity={(c, p): rng.random() for c in claims for p in prem},
                            nli={(c, p): NliScores(0, rng.uniform(50, 100), 0) for c in claims for p in prem})
        taus = sorted(rng.random() for _ in range(2))
        low = {e.claim_atom for e in matches_from_scores(scores, taus[0])}
        high = {e.claim_atom for e in matches_from_scores(scores, taus[1])}
        assert high <= low
        c_low, c_high = sorted(rng.uniform(0, 100) for _ in range(2))
        assert contradicts_from_scores(scores, c_high) <= contradicts_from_scores(scores, c_low)


def test_score_pairs_embeds_each_sentence_once():
    calls = []

    class Counting(StubEmbedder):
        def embed(self, text):
            calls.append(text)
            return super().embed(text)

    premise = formula("arg0(a,b)", "arg1(a,c)")
    claim = formula("arg0(a,b)", "arg0(d,e)")
    s = score_pairs(premise, claim, REG, Counting(), StubNli())
    assert len(calls) == len(set(calls)) == 3
    assert len(s.similarity) == len(s.nli) == 4


def test_threshold_range_checked():
    with pytest.raises(ValueError):
        matches_from_scores(PairScores([], [], {}), 1.5)
    with pytest.raises(ValueError):
        contradicts_from_scores(PairScores([], [], {}), -1)


def test_relation_set_one_match_per_claim():
    c = atom("r(a,b)")
    with pytest.raises(ValueError):
        RelationSet(frozenset({MatchEdge(c, atom("r(c,d)"), 0.7), MatchEdge(c, atom("r(e,f)"), 0.8)}))


# -- mapping -------------------------------------------------------------------------------------


def test_unrelated_atoms_and_shared_atom():
    phi1, phi2 = formula("arg1(car,red)", "arg2(car,fast)"), formula("arg1(car,red)")
    g = build_mapping([phi1, phi2], RelationSet())
    assert g[atom("arg1(car,red)")] == 1 and g[atom("arg2(car,fast)")] == 2
    assert str(translate(phi1, g)) == "x1 ∧ x2"
    assert str(translate(phi2, g)) == "x1"


def test_match_merges_letters():
    rel = RelationSet(frozenset({MatchEdge(atom("arg0(move,tiger)"), atom("arg0(walk,tiger)"), 0.8483)}))
    g = build_mapping([TIGER_WALK, TIGER_MOVE], rel)
    assert g[atom("arg0(walk,tiger)")] == g[atom("arg0(move,tiger)")] == 1
    assert g[atom("location(walk,cage)")] == 2


def test_contradiction_complements():
    rel = RelationSet(contradicts=frozenset({
        ContradictEdge(atom("arg0(sleep,tiger)"), atom("arg0(walk,tiger)"), 85),
        ContradictEdge(atom("location(sleep,cage)"), atom("location(walk,cage)"), 82),
    }))
    g = build_mapping([TIGER_WALK, TIGER_SLEEP], rel)
    assert g.as_dict() == {"arg0(walk,tiger)": "x1", "arg0(sleep,tiger)": "¬x1",
                           "location(walk,cage)": "x2", "location(sleep,cage)": "¬x2"}
    assert str(translate(TIGER_SLEEP, g)) == "¬x1 ∧ ¬x2"


def test_translate_homomorphism():
    a, b = atom("r(a,b)"), atom("r(c,d)")
    rel = RelationSet(contradicts=frozenset({ContradictEdge(b, a, 90)}))
    g = build_mapping([conj([Atom(a), Not(Atom(b))])], rel)
    f = Not(And(Atom(a), Not(Atom(b))))
    assert translate(f, g) == Not(And(Letter(1), Not(Not(Letter(1)))))
    # a positive-literal mapping keeps the connective skeleton unchanged
    plain = build_mapping([f])
    assert skeleton(translate(f, plain)) == skeleton(f)
    assert translate(Top, g) is Top
    with pytest.raises(UnmappedAtom):
        translate(Atom(atom("q(x,y)")), g)


def test_conflict_inside_matched_class():
    c, p = atom("r(c,1)"), atom("r(p,1)")
    rel = RelationSet(frozenset({MatchEdge(c, p, 0.9)}), frozenset({ContradictEdge(c, p, 95)}))
    with pytest.raises(ConflictError) as info:
        build_mapping([Atom(p), Atom(c)], rel)
    assert set(info.value.atoms) == {c, p}
    g = build_mapping([Atom(p), Atom(c)], rel, drop_conflicts=True)
    assert g[c] == g[p] and len(g.dropped) == 1


def test_odd_cycle_conflict():
    c1, c2 = atom("r(c,1)"), atom("r(c,2)")
    p1, p2 = atom("r(p,1)"), atom("r(p,2)")
    rel = RelationSet(
        frozenset({MatchEdge(c2, p2, 0.9)}),
        frozenset({ContradictEdge(c1, p1, 90), ContradictEdge(c2, p1, 90), ContradictEdge(c1, p2, 90)}),
    )
    with pytest.raises(ConflictError):
        build_mapping([conj([Atom(p1), Atom(p2)]), conj([Atom(c1), Atom(c2)])], rel)


# Random conflict-free relation sets: atoms are first given a hidden
# (component, sign, class) plan; ≃ edges stay inside a class and ⊥ edges
# join opposite-signed classes of one component, so a valid mapping exists.


def random_relations(rng):
    n = rng.randint(2, 12)
    atoms_ = [AmrAtom("r", "a", str(i)) for i in range(n)]
    rng.shuffle(atoms_)
    split = rng.randint(1, n - 1)
    premise, claim = atoms_[:split], atoms_[split:]
    plan = {a: (rng.randint(0, 2), rng.choice((1, -1)), rng.randint(0, 3)) for a in atoms_}
    matches, contradicts = {}, set()
    for c in claim:
        same = [p for p in premise if plan[p] == plan[c]]
        if same and rng.random() < 0.7:
            matches[c] = MatchEdge(c, rng.choice(same), 0.9)
        opposite = [p for p in premise if plan[p][0] == plan[c][0] and plan[p][1] != plan[c][1]]
        for p in opposite:
            if rng.random() < 0.5:
                contradicts.add(ContradictEdge(c, p, 95))
    rel = RelationSet(frozenset(matches.values()), frozenset(contradicts))
    return conj([Atom(a) for a in premise]), conj([Atom(a) for a in claim]), rel


def classes(rel, atoms_):
    """≃ closure by brute-force flooding."""
    group = {a: {a} for a in atoms_}
    changed = True
    while changed:
        changed = False
        for m in rel.matches:
            merged = group[m.claim_atom] | group[m.premise_atom]
            for a in merged:
                if group[a] != merged:
                    group[a] = merged
                    changed = True
    return group


def check_mapping(phi, psi, rel, g):
    from enthymeme.logic import atoms as leaves

    every = sorted(leaves(phi) | leaves(psi))
    group = classes(rel, every)
    for a in every:
        assert 1 <= abs(g[a]) <= g.alphabet_size
        for b in group[a]:
            assert g[a] == g[b]
    for e in rel.contradicts:
        assert g[e.claim_atom] == -g[e.premise_atom]


def test_mapping_property_suite():
    rng = random.Random(1234)
    for _ in range(1000):
        phi, psi, rel = random_relations(rng)
        check_mapping(phi, psi, rel, build_mapping([phi, psi], rel))


def seeded_conflict(rng):
    """A conflict-free set plus one ⊥ edge that no mapping can satisfy."""
    while True:
        phi, psi, rel = random_relations(rng)
        g = build_mapping([phi, psi], rel)
        from enthymeme.logic import atoms as leaves

        pairs = [(c, p) for c in sorted(leaves(psi)) for p in sorted(leaves(phi)) if g[c] == g[p]]
        if pairs:
            c, p = rng.choice(pairs)
            return phi, psi, RelationSet(rel.matches, rel.contradicts | {ContradictEdge(c, p, 99)})


def test_seeded_conflicts_raise():
    rng = random.Random(77)
    for _ in range(300):
        phi, psi, rel = seeded_conflict(rng)
        with pytest.raises(ConflictError):
            build_mapping([phi, psi], rel)
        g = build_mapping([phi, psi], rel, drop_conflicts=True)
        assert g.dropped


def test_mapping_deterministic():
    rng = random.Random(5)
    phi, psi, rel = random_relations(rng)
    assert build_mapping([phi, psi], rel) == build_mapping([phi, psi], rel)


def test_end_to_end_spiderweb_atoms(spiderweb_fixtures):
    sc = spiderweb_fixtures["scenario"]
    prov = stub_providers(spiderweb_fixtures)
    f = {s: graph_to_formula(parse_penman(t), True) for s, t in sc["amr"].items()}
    phi = conj([f[sc["premise"]], f[sc["implicit"][0]]])
    psi = f[sc["claim"]]
    s = score_pairs(phi, psi, REG, prov.embedder, prov.nli)
    matches = matches_from_scores(s, 0.6)
    assert {(str(m.claim_atom), str(m.premise_atom)) for m in matches} == {
        ("arg0(escape,large insect)", "arg0(escape,prey)"),
        ("time(escape,recent)", "arg0(escape,prey)"),
    }
