"""Command line interface.

Exit codes: 0 ok, 1 usage error, 2 provider failure, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from . import data_path
from .amr import AmrError
from .providers import (
    DiskCache,
    HttpEmbedder,
    HttpGenerator,
    HttpNli,
    HttpParser,
    ProviderError,
    Providers,
    load_fixtures,
    merge_fixtures,
    stub_providers,
    with_cache,
)
from .providers.http import ENV_URLS
from .relax import TemplateRegistry
from .pipeline import (
    STEP_TYPES,
    BinaryInstance,
    DataError,
    Gold,
    RunConfig,
    augment,
    binarize,
    binarize_all,
    build_argument_graph,
    decode_all,
    export_dot,
    grid,
    load_dataset,
    plot_svg,
    report_from_decisions,
    run_instance,
    sweep,
    sweep_csv,
    verify_argument_graph,
    write_jsonl,
    write_labels,
)

EXIT_OK, EXIT_USAGE, EXIT_PROVIDER, EXIT_DATA = 0, 1, 2, 3

log = logging.getLogger("enthymeme")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 by default, which we reserve
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bundled(name: str) -> Path:
    """Resolve ``name`` as a path, falling back to bundled data files."""
    path = Path(name)
    if path.exists():
        return path
    for candidate in (name, name + ".json", name + ".jsonl"):
        bundled = Path(str(data_path(candidate)))
        if bundled.exists():
            return bundled
    raise DataError(f"no such file: {name}")


def _float_list(text: str) -> list[float]:
    """``0.5:0.8:0.05`` (inclusive range) or ``80,90,100``."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            return grid(start, stop, step)
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from None


def _step_list(text: str) -> list[str]:
    steps = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in steps if s not in STEP_TYPES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown step type(s) {bad}; choose from {STEP_TYPES}")
    return steps


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau-m", type=float, default=0.6, help="neuro-matching threshold in [0, 1]")
    p.add_argument("--tau-c", type=float, default=80.0, help="neuro-contradict threshold in [0, 100]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache-dir", help="persist provider responses here")
    p.add_argument("--embed-url", help=f"embedding service (default ${ENV_URLS['embed']})")
    p.add_argument("--nli-url", help=f"NLI service (default ${ENV_URLS['nli']})")
    p.add_argument("--gen-url", help=f"generation service (default ${ENV_URLS['generate']})")
    p.add_argument("--parse-url", help=f"AMR parsing service (default ${ENV_URLS['parse']})")
    p.add_argument("--stub-fixtures", action="append", default=[], metavar="FILE",
                   help="use fixture-backed providers (repeatable; bundled names allowed)")
    p.add_argument("--compound-constants", action="store_true",
                   help="fold :mod leaves into compound constants such as 'large insect'")
    p.add_argument("--dimacs-dump", metavar="DIR", help="write the CNF of every SAT call here")
    p.add_argument("--workers", type=int, default=1, help="instances decoded in parallel")
    p.add_argument("--templates", metavar="FILE", help="role<TAB>pattern template file")
    p.add_argument("--drop-conflicts", action="store_true",
                   help="drop contradict edges that clash with matches instead of failing")
    p.add_argument("-v", "--verbose", action="store_true")


def _dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("dataset", help="dataset file (or bundled name such as 'minicorpus')")
    p.add_argument("--format", default="jsonl", choices=["jsonl", "arct", "anli"])


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--premise")
    p.add_argument("--implicit", action="append", default=[], help="implicit premise (repeatable)")
    p.add_argument("--claim")
    p.add_argument("--amr", metavar="FILE", help="JSON object mapping sentences to PENMAN")
    p.add_argument("--dataset", help="take the instance from this dataset instead")
    p.add_argument("--format", default="jsonl", choices=["jsonl", "arct", "anli"])
    p.add_argument("--item", help="item id within --dataset")
    p.add_argument("--side", choices=["helpful", "unhelpful"], default="helpful")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="enthymeme", description="Decode enthymemes with AMR graphs and a SAT check.",
                     epilog="Exit codes: 0 ok, 1 usage error, 2 provider failure, 3 data error.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decode", help="decode one instance and print its label and trace")
    _common(p)
    _instance_args(p)
    p.add_argument("--steps", default="original", choices=STEP_TYPES, help="step type (with --dataset)")
    p.add_argument("--trace", metavar="FILE", help="write the JSON trace here instead of stdout")

    p = sub.add_parser("eval", help="decode a dataset and report metrics")
    _common(p)
    _dataset_args(p)
    p.add_argument("--steps", default="original", choices=STEP_TYPES, help="step type")
    p.add_argument("--exclude-errored", action="store_true", help="leave errored instances out of metrics")
    p.add_argument("--labels", metavar="FILE", help="write a TSV label file")
    p.add_argument("--traces", metavar="FILE", help="write JSONL traces")

    p = sub.add_parser("sweep", help="evaluate over threshold grids")
    _common(p)
    _dataset_args(p)
    p.add_argument("--tau-m-grid", type=_float_list, default=grid(0.5, 0.8, 0.05))
    p.add_argument("--tau-c-grid", type=_float_list, default=[80.0, 90.0, 100.0])
    p.add_argument("--steps", type=_step_list, default=["original", "1", "2", "3"],
                   help="comma-separated step types")
    p.add_argument("--exclude-errored", action="store_true")
    p.add_argument("--out", metavar="FILE", help="CSV output (default stdout)")
    p.add_argument("--svg", metavar="FILE", help="also draw accuracy against tau_m")

    p = sub.add_parser("graph", help="build an argument graph and print it as DOT")
    _common(p)
    _instance_args(p)
    p.add_argument("--steps", default="original", choices=STEP_TYPES[1:], help="step type (with --dataset)")
    p.add_argument("--out", metavar="FILE", help="DOT output (default stdout)")

    p = sub.add_parser("augment", help="attach generated implicit-premise chains")
    _common(p)
    _dataset_args(p)
    p.add_argument("--steps", type=lambda s: [int(x) for x in s.split(",")], default=[1, 2, 3],
                   help="comma-separated chain lengths")
    p.add_argument("--out", metavar="FILE", required=True, help="JSONL output")
    return parser


# -- wiring ------------------------------------------------------------------


def make_providers(args: argparse.Namespace) -> Providers:
    if args.stub_fixtures:
        fixtures = merge_fixtures(*(load_fixtures(_bundled(f)) for f in args.stub_fixtures))
        providers = stub_providers(fixtures)
    else:
        def url(flag: str | None, op: str) -> str | None:
            return flag or os.environ.get(ENV_URLS[op])

        urls = {op: url(getattr(args, f"{flag}_url"), op)
                for flag, op in (("embed", "embed"), ("nli", "nli"), ("gen", "generate"), ("parse", "parse"))}
        providers = Providers(
            embedder=HttpEmbedder(urls["embed"]) if urls["embed"] else None,
            nli=HttpNli(urls["nli"]) if urls["nli"] else None,
            generator=HttpGenerator(urls["generate"]) if urls["generate"] else None,
            parser=HttpParser(urls["parse"]) if urls["parse"] else None,
        )
    if args.cache_dir:
        cache = DiskCache(args.cache_dir)
        providers = Providers(*(with_cache(p, cache) for p in
                                (providers.embedder, providers.nli, providers.generator, providers.parser)))
    return providers


def make_config(args: argparse.Namespace, step_type: str = "original") -> RunConfig:
    registry = TemplateRegistry.from_file(args.templates) if args.templates else None
    try:
        return RunConfig(tau_m=args.tau_m, tau_c=args.tau_c, step_type=step_type, seed=args.seed,
                         compound_constants=args.compound_constants, drop_conflicts=args.drop_conflicts,
                         workers=args.workers, registry=registry, dimacs_dir=args.dimacs_dump)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _load(args: argparse.Namespace):
    dataset = load_dataset(_bundled(args.dataset), args.format)
    for v in dataset.violations:
        print(f"warning: {v}", file=sys.stderr)
    return dataset


def _single_instance(args: argparse.Namespace) -> BinaryInstance:
    if args.dataset:
        if not args.item:
            raise DataError("--dataset needs --item")
        matches = [i for i in _load(args) if i.id == args.item]
        if not matches:
            raise DataError(f"no item {args.item!r} in {args.dataset}")
        instances = binarize(matches[0], args.steps)
        return instances[0] if args.side == "helpful" or len(instances) == 1 else instances[1]
    if not args.premise or not args.claim:
        raise _UsageError("give --premise and --claim, or --dataset with --item")
    amr = {}
    if args.amr:
        with open(_bundled(args.amr), encoding="utf-8") as fh:
            amr = json.load(fh)
    return BinaryInstance("cli", args.premise, tuple(args.implicit), args.claim, Gold.ENTAILMENT,
                          "original" if args.implicit else "none", amr)


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- commands ----------------------------------------------------------------


def cmd_decode(args: argparse.Namespace) -> int:
    instance = _single_instance(args)
    decision = run_instance(instance, make_config(args, instance.step_type), make_providers(args))
    trace = json.dumps(decision.trace, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    if decision.errored:
        print(f"error: {decision.trace['error']}", file=sys.stderr)
        _write(args.trace, trace)
        return EXIT_PROVIDER if decision.trace.get("error_kind") == "provider" else EXIT_DATA
    print(f"{decision.predicted.value}\t{decision.verdict.label.value}")
    if args.trace:
        _write(args.trace, trace)
    else:
        sys.stdout.write(trace)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    items = _load(args)
    instances, skipped = binarize_all(items, args.steps)
    decisions = decode_all(instances, make_config(args, args.steps), make_providers(args))
    report = report_from_decisions(decisions, args.exclude_errored)
    if args.labels:
        _write(args.labels, write_labels(decisions))
    if args.traces:
        _write(args.traces, "".join(json.dumps(d.trace, ensure_ascii=False, sort_keys=True) + "\n"
                                    for d in decisions))
    out = report.as_dict()
    out["skipped_items"] = skipped
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    items = list(_load(args))
    rows = sweep(items, args.tau_m_grid, args.tau_c_grid, args.steps, make_config(args),
                 make_providers(args), args.exclude_errored)
    _write(args.out, sweep_csv(rows))
    if args.svg:
        plot_svg(rows, args.svg)
    return EXIT_OK


def cmd_graph(args: argparse.Namespace) -> int:
    instance = _single_instance(args)
    graph = build_argument_graph(instance.premise, instance.implicit, instance.claim,
                                 make_config(args), make_providers(args), instance.amr)
    for problem in verify_argument_graph(graph):
        print(f"warning: {problem}", file=sys.stderr)
    _write(args.out, export_dot(graph))
    return EXIT_OK


def cmd_augment(args: argparse.Namespace) -> int:
    providers = make_providers(args)
    if providers.generator is None:
        raise ProviderError("no generation provider configured (--gen-url or --stub-fixtures)")
    items = augment(_load(args), providers.generator, args.steps)
    write_jsonl(items, args.out)
    failed = sum(1 for i in items if i.flags)
    print(f"wrote {len(items)} items ({failed} flagged) to {args.out}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"decode": cmd_decode, "eval": cmd_eval, "sweep": cmd_sweep, "graph": cmd_graph,
            "augment": cmd_augment}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error from _Parser.error
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"enthymeme: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProviderError as exc:
        print(f"enthymeme: provider failure: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (DataError, AmrError, ValueError, KeyError, OSError) as exc:
        print(f"enthymeme: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
