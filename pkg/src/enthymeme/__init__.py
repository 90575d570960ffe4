"""Decoding enthymemes with AMR graphs, relaxed propositional logic and a SAT check."""

from importlib.resources import files

__version__ = "0.1.0"


def data_path(name: str):
    """Path to a file bundled under ``enthymeme/data``."""
    return files(__name__).joinpath("data", name)
