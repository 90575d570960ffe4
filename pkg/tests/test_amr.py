import pytest

from enthymeme.amr import (
    AmrEdge,
    AmrGraph,
    AmrNode,
    Constant,
    CycleDetected,
    DuplicateVariable,
    EmptyInput,
    UnbalancedParens,
    UndefinedVariable,
    isomorphic,
    normalize_role,
    parse_penman,
    parse_penman_many,
    serialize_penman,
    validate,
)

from .conftest import WANT_GO, WANT_NOT_GO


def test_parse_want_go():
    g = parse_penman(WANT_GO)
    assert g.root == "w"
    assert {(n.variable, n.concept) for n in g.nodes} == {("w", "want-01"), ("b", "boy"), ("g", "go-01")}
    assert [str(e) for e in g.edges] == ["arg0(w, b)", "arg1(w, g)", "arg0(g, b)"]
    assert not any(n.negated for n in g.nodes)


def test_parse_want_not_go_negates_g_only():
    g = parse_penman(WANT_NOT_GO)
    assert [n.variable for n in g.nodes if n.negated] == ["g"]
    assert len(g.edges) == 3  # polarity is a flag, not an edge


@pytest.mark.parametrize("text,error", [
    ("(x / cat", UnbalancedParens),
    ("(x / cat))", UnbalancedParens),
    ("", EmptyInput),
    ("   \n", EmptyInput),
    ("(a / dog :arg0 b)", UndefinedVariable),
    ("(a / dog :arg0 (a / cat))", DuplicateVariable),
    ("(a / dog :arg0 (b / cat :arg1 a))", CycleDetected),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_penman(text)


def test_roles_are_normalized():
    g = parse_penman("(w / want-01 :ARG0 (b / boy))")
    assert g.edges[0].role == "arg0"
    assert normalize_role(":ARG1-of") == ("arg1", True)
    assert normalize_role(":consist-of") == ("consist-of", False)


def test_inverse_role():
    g = parse_penman("(p / prey :arg1-of (t / trap-01))")
    (e,) = g.edges
    assert (e.role, e.source, e.target, e.inverted) == ("arg1", "t", "p", True)
    assert e.parent == "p" and e.child == "t"


def test_constants():
    g = parse_penman('(c / city :name (n / name :op1 "New York") :quant 5 :mode imperative)')
    consts = {e.role: e.target for e in g.edges if e.is_constant}
    assert consts["op1"] == Constant("New York", quoted=True)
    assert consts["quant"] == Constant("5")
    assert consts["mode"] == Constant("imperative")


def test_comments_and_alignments_ignored():
    text = "# ::snt The boy wants.\n(w / want-01~e.2 :arg0 (b / boy~e.1))"
    g = parse_penman(text)
    assert [n.concept for n in g.nodes] == ["want-01", "boy"]


def test_reentrancy_before_declaration():
    g = parse_penman("(w / want-01 :arg1 (g / go-01 :arg0 b) :arg0 (b / boy))")
    assert str(g.edges[1]) == "arg0(g, b)"


@pytest.mark.parametrize("text", [WANT_GO, WANT_NOT_GO, "(c / cat)",
                                  "(p / prey :arg1-of (t / trap-01) :quant 3)",
                                  '(c / city :name (n / name :op1 "New York"))'])
def test_round_trip(text):
    g = parse_penman(text)
    again = parse_penman(serialize_penman(g))
    assert isomorphic(g, again)
    assert [n.negated for n in g.nodes] == [n.negated for n in again.nodes]


def test_single_node_serializes_verbatim():
    assert serialize_penman(parse_penman("(c / cat)")) == "(c / cat)"


def test_parse_is_deterministic():
    assert parse_penman(WANT_NOT_GO) == parse_penman(WANT_NOT_GO)


def test_validate():
    assert validate(parse_penman(WANT_GO)) == []
    nodes = (AmrNode("a", "x"), AmrNode("b", "y"))
    cyc = AmrGraph("a", nodes, (AmrEdge("r", "a", "b"), AmrEdge("r", "b", "a")))
    assert [v.rule for v in validate(cyc)] == ["CycleDetected"]
    undefined = AmrGraph("a", nodes[:1], (AmrEdge("r", "a", "z"),))
    assert [v.rule for v in validate(undefined)] == ["UndefinedVariable"]
    unreachable = AmrGraph("a", nodes, ())
    assert [(v.rule, v.subject) for v in validate(unreachable)] == [("Unreachable", "b")]


def test_many():
    graphs = parse_penman_many(WANT_GO + "\n\n(c / cat)\n")
    assert [g.root for g in graphs] == ["w", "c"]
