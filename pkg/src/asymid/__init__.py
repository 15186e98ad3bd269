"""Asymmetric influence diagrams.

Labelled models where nodes and arcs exist only in some scenarios, solved
by decomposing on split variables and checked against an explicit
decision tree.
"""

from importlib import resources

from .errors import AidError, IllDefined, ModelError
from .labels import parse_label
from .model import AidModel, Arc, ArcKind, Node, NodeKind, RestrictiveFunction, validate
from .modelio import dump, load, parse, parse_with_diagnostics, serialize
from .solver import SolveResult, solve
from .structure import (contexts, enumerate_split_configurations, induce_partial_order, reduce,
                        reduce_sequence, validate_cycles, well_definedness)

__version__ = "0.1.0"

__all__ = [
    "AidError", "IllDefined", "ModelError", "parse_label", "AidModel", "Arc", "ArcKind", "Node",
    "NodeKind", "RestrictiveFunction", "validate", "dump", "load", "parse", "parse_with_diagnostics",
    "serialize", "SolveResult", "solve", "contexts", "enumerate_split_configurations",
    "induce_partial_order", "reduce", "reduce_sequence", "validate_cycles", "well_definedness",
    "corpus_path", "corpus_files",
]


def corpus_path(name="dating.aid"):
    """Path of a model bundled with the package."""
    return resources.files(__name__).joinpath("corpus", name)


def corpus_files(include_invalid=False):
    root = resources.files(__name__).joinpath("corpus")
    out = sorted((p for p in root.iterdir() if p.name.endswith(".aid")), key=lambda p: p.name)
    if include_invalid:
        out += sorted((p for p in root.joinpath("invalid").iterdir() if p.name.endswith(".aid")),
                      key=lambda p: p.name)
    return out
