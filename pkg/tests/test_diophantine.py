import math

import numpy as np
import pytest

from fkhull.diophantine import (
    DiophantineParams,
    DiophantineStyle,
    check,
    check_homogeneous,
    divisor,
    divisor_table,
    divisors,
    empirical_nu,
    homogeneous_nu,
    lattice_distance,
)
from fkhull.exceptions import FKHullConfigError
from fkhull.index_space import MultiIndex, enumerate_indices
from tests.conftest import GOLDEN_OMEGA


def test_lattice_distance() -> None:
    assert lattice_distance(2 * math.pi + 0.1) == pytest.approx(0.1)
    assert lattice_distance(-0.2) == pytest.approx(0.2)
    assert lattice_distance(3 * math.pi) == pytest.approx(math.pi)


def test_divisor_of_unit_mode() -> None:
    expected = 2 * math.pi * (1 - (math.sqrt(5) - 1) / 2)
    assert divisor(GOLDEN_OMEGA, (1.0,), MultiIndex.unit(1)) == pytest.approx(expected)


def test_divisor_rejects_zero_and_missing_frequency() -> None:
    with pytest.raises(ValueError):
        divisor(1.0, (1.0,), MultiIndex.zero())
    with pytest.raises(ValueError):
        divisor(1.0, (1.0,), MultiIndex.unit(2))


def test_golden_mean_passes_product_check() -> None:
    index_set = enumerate_indices(1, 64, 1.0)
    report = check(DiophantineParams(nu=0.1, tau=1.0), GOLDEN_OMEGA, (1.0,), index_set)
    assert report.passed
    assert report.witness is None
    assert report.empirical_nu > 0.1
    assert report.set_size == 129
    assert report.min_divisor == pytest.approx(float(np.sort(divisors(GOLDEN_OMEGA, (1.0,), index_set))[1]))


def test_near_resonant_rotation_is_rejected() -> None:
    index_set = enumerate_indices(1, 10, 1.0)
    omega = 2 * math.pi / 3
    assert lattice_distance(3 * omega) <= 1e-15
    report = check(DiophantineParams(nu=1e-3, tau=1.0), omega, (1.0,), index_set)
    assert not report.passed
    assert report.witness is not None
    assert MultiIndex.parse(report.witness)[1] % 3 == 0
    assert report.witness_divisor is not None and report.witness_divisor <= 1e-14


def test_power_style_is_positive_for_golden_mean() -> None:
    index_set = enumerate_indices(1, 64, 1.0)
    nu = empirical_nu(GOLDEN_OMEGA, (1.0,), index_set, 1.0, DiophantineStyle.POWER)
    assert nu > 0
    params = DiophantineParams(nu=nu / 2, tau=1.0, style="power")
    assert check(params, GOLDEN_OMEGA, (1.0,), index_set).passed


def test_empirical_nu_is_tight() -> None:
    index_set = enumerate_indices(2, 10, 1.0)
    alpha = (1.0, 1 / math.sqrt(2))
    nu = empirical_nu(GOLDEN_OMEGA, alpha, index_set, 1.0)
    assert check(DiophantineParams(nu=nu * (1 - 1e-9), tau=1.0), GOLDEN_OMEGA, alpha, index_set).passed
    assert not check(DiophantineParams(nu=nu * (1 + 1e-9), tau=1.0), GOLDEN_OMEGA, alpha, index_set).passed


def test_homogeneous_condition() -> None:
    index_set = enumerate_indices(2, 12, 1.0)
    assert homogeneous_nu((1.0, 1 / math.sqrt(2)), index_set, 1.0) > 0
    report = check_homogeneous(DiophantineParams(nu=1e-3, tau=1.0), (1.0, 0.5), index_set)
    assert not report.passed
    assert report.witness is not None
    k = MultiIndex.parse(report.witness)
    assert k[1] + 0.5 * k[2] == 0


def test_divisor_table_lists_one_of_each_pair() -> None:
    index_set = enumerate_indices(1, 20, 1.0)
    table = divisor_table(GOLDEN_OMEGA, (1.0,), index_set, count=5)
    assert len(table) == 5
    values = [value for _, value in table]
    assert values == sorted(values)
    keys = {abs(k[1]) for k, _ in table}
    assert len(keys) == 5
    # Fibonacci numbers give the closest returns of the golden rotation
    assert abs(table[0][0][1]) == 13


def test_params_validation() -> None:
    with pytest.raises(FKHullConfigError):
        DiophantineParams(nu=0.0, tau=1.0)
    with pytest.raises(FKHullConfigError):
        DiophantineParams(nu=0.1, tau=-1.0)
    with pytest.raises(FKHullConfigError, match="style"):
        DiophantineParams(nu=0.1, tau=1.0, style="sum")
