"""Semi-supervised iterated learning simulator for binary-language contact."""

__version__ = "0.1.0"

from .bitlang import (
    CompositionalLanguage,
    LanguageTable,
    expand,
    identity_language,
    mix_languages,
    random_compositional_language,
    table_similarity_raw,
)
from .ilm import PRESETS, SimConfig, Trajectory, preset, run_batch, run_one, run_simulation
from .metrics import Baselines, MetricReport, compute_baselines, report
from .neuralnet import Agent, Mlp, NumericalDivergenceError, TrainHyper

__all__ = [
    "Agent",
    "Baselines",
    "CompositionalLanguage",
    "LanguageTable",
    "MetricReport",
    "Mlp",
    "NumericalDivergenceError",
    "PRESETS",
    "SimConfig",
    "TrainHyper",
    "Trajectory",
    "compute_baselines",
    "expand",
    "identity_language",
    "mix_languages",
    "preset",
    "random_compositional_language",
    "report",
    "run_batch",
    "run_one",
    "run_simulation",
    "table_similarity_raw",
]
