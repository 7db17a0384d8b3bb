import math
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from fkhull.fourier import FourierSeries, FrequencyBasis
from fkhull.index_space import IndexSet, enumerate_indices
from fkhull.solvers.short_range import ShortRangeModel
from fkhull.utils import GOLDEN_MEAN

GOLDEN_OMEGA = 2.0 * math.pi * GOLDEN_MEAN


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def golden_basis() -> FrequencyBasis:
    return FrequencyBasis((1.0,), GOLDEN_OMEGA, 0.05)


@pytest.fixture
def two_frequency_basis() -> FrequencyBasis:
    return FrequencyBasis((1.0, 1.0 / math.sqrt(2.0)), GOLDEN_OMEGA, 0.05)


@pytest.fixture
def line_set() -> IndexSet:
    return enumerate_indices(1, 64, 1.0)


@pytest.fixture
def small_line_set() -> IndexSet:
    return enumerate_indices(1, 16, 1.0)


@pytest.fixture
def plane_set() -> IndexSet:
    return enumerate_indices(2, 12, 1.0)


@pytest.fixture
def random_series(rng: np.random.Generator) -> Callable[..., FourierSeries]:
    """Return a factory of real zero-average series decaying like exp(-decay |k|_s)."""

    def factory(index_set: IndexSet, scale: float = 1e-3, decay: float = 0.5) -> FourierSeries:
        raw = rng.standard_normal(len(index_set)) + 1j * rng.standard_normal(len(index_set))
        coeffs = scale * raw * np.exp(-decay * index_set.weights)
        series = FourierSeries(index_set, coeffs).real_projection()
        return series.without_mean()

    return factory


@pytest.fixture
def sine_model(line_set: IndexSet, golden_basis: FrequencyBasis) -> ShortRangeModel:
    return ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", 0.05), golden_basis)


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[str, str], Path]:
    def write(text: str, name: str = "run.ini") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return write
