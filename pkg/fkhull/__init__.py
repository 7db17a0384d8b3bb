"""Spectral KAM solver for hull functions of Frenkel-Kontorova chains."""

from . import entities, exceptions, solvers, utils
from .fourier import FourierSeries, FrequencyBasis
from .harness import Harness, run, run_batch
from .index_space import IndexSet, MultiIndex, enumerate_indices

__all__ = [
    "FourierSeries",
    "FrequencyBasis",
    "Harness",
    "IndexSet",
    "MultiIndex",
    "enumerate_indices",
    "entities",
    "exceptions",
    "run",
    "run_batch",
    "solvers",
    "utils",
]
