"""Dataset handling, decoding, evaluation, sweeps and argument graphs."""

from .dataset import (
    STEP_TYPES,
    BinaryInstance,
    DataError,
    Dataset,
    DatasetItem,
    Gold,
    MissingSteps,
    SchemaViolation,
    UnknownFormat,
    augment,
    binarize,
    load_dataset,
    write_jsonl,
)
from .decode import Decision, Prepared, RunConfig, decide, decode_all, prepare_all, prepare_instance, run_instance
from .graph import ArcLabel, ArgumentGraph, build_argument_graph, export_dot, verify_argument_graph
from .metrics import EvalReport, confusion, evaluate, report_from_decisions
from .sweep import CSV_COLUMNS, SweepRow, binarize_all, grid, plot_svg, sweep, sweep_csv, write_labels

__all__ = [name for name in dir() if not name.startswith("_")]
