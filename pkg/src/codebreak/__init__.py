"""Benchmark harness for verifier-based code-deduction games."""

__version__ = "0.1.0"

from .catalog import Catalog, Criterion, VerifierCard, default_catalog, load_catalog
from .dsl import Code, evaluate, extension, parse_rule, render
from .setups import (
    Difficulty,
    GameSetup,
    Mode,
    generate_batch,
    generate_setup,
    sample_permutation,
    solve,
)

__all__ = [
    "Catalog",
    "Code",
    "Criterion",
    "Difficulty",
    "GameSetup",
    "Mode",
    "VerifierCard",
    "default_catalog",
    "evaluate",
    "extension",
    "generate_batch",
    "generate_setup",
    "load_catalog",
    "parse_rule",
    "render",
    "sample_permutation",
    "solve",
]
