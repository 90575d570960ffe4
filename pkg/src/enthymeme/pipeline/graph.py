"""Structured argument graphs: which premise combinations support,
contradict or stay neutral to a claim, and why."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from ..amr import parse_penman
from ..logic import Formula, conj, graph_to_formula, to_text
from ..providers.base import ProviderUnavailable, Providers
from ..reason import VerdictLabel, classify, truth_table_classify
from ..relax import RelationSet, build_mapping, relations_from_scores, score_pairs, translate
from .dataset import DataError
from .decode import RunConfig


class ArcLabel(str, enum.Enum):
    SUPPORT = "Support"
    CONTRADICT = "Contradict"
    NEUTRAL = "Neutral"
    COMBINE = "Combine"


_FROM_VERDICT = {
    VerdictLabel.ENTAILMENT: ArcLabel.SUPPORT,
    VerdictLabel.CONTRADICTION: ArcLabel.CONTRADICT,
    VerdictLabel.NEUTRAL: ArcLabel.NEUTRAL,
}


@dataclass(frozen=True)
class GraphNode:
    id: str
    kind: str  # premise | implicit | combined | claim
    text: str
    formula: Formula


@dataclass(frozen=True)
class Arc:
    source: str
    target: str
    label: ArcLabel
    relations: RelationSet | None = None
    abstract_phi: Formula | None = None
    abstract_psi: Formula | None = None
    premise_inconsistent: bool = False


@dataclass
class ArgumentGraph:
    nodes: list[GraphNode] = field(default_factory=list)
    arcs: list[Arc] = field(default_factory=list)

    def node(self, node_id: str) -> GraphNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def decision_arcs(self) -> list[Arc]:
        return [a for a in self.arcs if a.label is not ArcLabel.COMBINE]

    def arc_from(self, source: str) -> Arc:
        for a in self.decision_arcs():
            if a.source == source:
                return a
        raise KeyError(source)


def _formula(sentence: str, amr: dict[str, str], config: RunConfig, providers: Providers) -> Formula:
    if sentence in amr:
        text = amr[sentence]
    elif providers.parser is not None:
        text = providers.parser.parse(sentence)
    else:
        raise DataError(f"no AMR for {sentence!r} and no parser configured")
    return graph_to_formula(parse_penman(text), config.compound_constants)


def _decision_arc(source: str, phi: Formula, psi: Formula, config: RunConfig, providers: Providers) -> Arc:
    scores = score_pairs(phi, psi, config.templates(), providers.embedder, providers.nli,
                         config.provider_workers)
    relations = relations_from_scores(scores, config.tau_m, config.tau_c, config.seed)
    mapping = build_mapping([phi, psi], relations, config.drop_conflicts)
    a_phi, a_psi = translate(phi, mapping), translate(psi, mapping)
    verdict = classify(a_phi, a_psi)
    return Arc(source, "claim", _FROM_VERDICT[verdict.label], relations, a_phi, a_psi,
               verdict.premise_inconsistent)


def build_argument_graph(premise: str, implicit: Sequence[str], claim: str, config: RunConfig,
                         providers: Providers, amr: dict[str, str] | None = None) -> ArgumentGraph:
    """Nodes for each sentence and each premise+implicit combination, with
    one decision arc per combination (and one from the premise alone)."""
    if providers.embedder is None or providers.nli is None:
        raise ProviderUnavailable("argument graphs need an embedding and an NLI provider")
    amr = amr or {}
    graph = ArgumentGraph()
    p_formula = _formula(premise, amr, config, providers)
    c_formula = _formula(claim, amr, config, providers)
    graph.nodes.append(GraphNode("premise", "premise", premise, p_formula))
    graph.arcs.append(_decision_arc("premise", p_formula, c_formula, config, providers))
    for i, sentence in enumerate(implicit, 1):
        i_formula = _formula(sentence, amr, config, providers)
        combined = conj([p_formula, i_formula])
        graph.nodes.append(GraphNode(f"implicit_{i}", "implicit", sentence, i_formula))
        graph.nodes.append(GraphNode(f"combined_{i}", "combined", f"{premise} + {sentence}", combined))
        graph.arcs.append(Arc("premise", f"combined_{i}", ArcLabel.COMBINE))
        graph.arcs.append(Arc(f"implicit_{i}", f"combined_{i}", ArcLabel.COMBINE))
        graph.arcs.append(_decision_arc(f"combined_{i}", combined, c_formula, config, providers))
    graph.nodes.append(GraphNode("claim", "claim", claim, c_formula))
    return graph


def verify_argument_graph(graph: ArgumentGraph) -> list[str]:
    """Recheck every decision arc by truth-table enumeration.  Returns a list
    of problems; empty means every arc agrees."""
    problems = []
    for arc in graph.decision_arcs():
        assert arc.abstract_phi is not None and arc.abstract_psi is not None
        check = truth_table_classify(arc.abstract_phi, arc.abstract_psi)
        if check is None:
            problems.append(f"{arc.source}: too many letters to enumerate")
        elif _FROM_VERDICT[check.label] is not arc.label:
            problems.append(f"{arc.source}: arc says {arc.label.value}, truth table says {check.label.value}")
    return problems


# -- DOT export --------------------------------------------------------------

_STYLE = {
    ArcLabel.SUPPORT: 'color="blue", fontcolor="blue"',
    ArcLabel.CONTRADICT: 'color="red", fontcolor="red"',
    ArcLabel.NEUTRAL: 'color="darkgreen", fontcolor="darkgreen", style="dashed"',
    ArcLabel.COMBINE: 'color="black"',
}


def _esc(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", " ")


def _q(text: str) -> str:
    return f'"{_esc(text)}"'


def _relation_lines(relations: RelationSet) -> list[str]:
    return [str(m) for m in sorted(relations.matches)] + [str(c) for c in sorted(relations.contradicts)]


def export_dot(graph: ArgumentGraph, name: str = "argument") -> str:
    """Graphviz text.  Node order follows the graph; arc colour encodes the label."""
    out = [f"digraph {_q(name)} {{", "  rankdir=LR;", '  node [shape=box, style="rounded"];']
    for n in graph.nodes:
        tooltip = to_text(n.formula)
        out.append(f"  {_q(n.id)} [label={_q(n.text)}, tooltip={_q(tooltip)}];")
    for a in graph.arcs:
        attrs = [_STYLE[a.label]]
        if a.label is not ArcLabel.COMBINE:
            notes = _relation_lines(a.relations) if a.relations else []
            attrs.append('label="' + "\\n".join(_esc(x) for x in [a.label.value, *notes]) + '"')
            tip = f"phi: {to_text(a.abstract_phi)}; psi: {to_text(a.abstract_psi)}"
            attrs.append(f"tooltip={_q(tip)}")
        out.append(f"  {_q(a.source)} -> {_q(a.target)} [{', '.join(attrs)}];")
    out.append("}")
    return "\n".join(out) + "\n"
