from typing import Callable

import numpy as np
import pytest

from fkhull.cohomology import (
    DivisorFloor,
    FloorPolicy,
    apply_L,
    apply_R,
    apply_S,
    condition,
    floor_hits,
    multiplier,
    small_divisors,
    solve_S,
)
from fkhull.exceptions import FKHullCohomologyError, FKHullConfigError, FKHullSmallDivisorError
from fkhull.fourier import FourierSeries, FrequencyBasis, shift_orbit, weighted_norm
from fkhull.index_space import IndexSet, enumerate_indices

SeriesFactory = Callable[..., FourierSeries]


def test_apply_S_is_orbit_difference(
    plane_set: IndexSet, two_frequency_basis: FrequencyBasis, random_series: SeriesFactory
) -> None:
    f = random_series(plane_set)
    for n in (1, -1, 3):
        expected = shift_orbit(f, two_frequency_basis, n) - f
        assert apply_S(n, f, two_frequency_basis).sup_distance(expected) < 1e-15


@pytest.mark.parametrize("n", [1, -1, 2, -3])
def test_solve_S_roundtrip(
    n: int, plane_set: IndexSet, two_frequency_basis: FrequencyBasis, random_series: SeriesFactory
) -> None:
    eta = random_series(plane_set, scale=1.0)
    phi = solve_S(n, eta, two_frequency_basis)
    assert phi.mean == 0
    defect = weighted_norm(apply_S(n, phi, two_frequency_basis) - eta, 0.0)
    assert defect <= 1e-12 * condition(two_frequency_basis, plane_set, n)


def test_solve_S_of_zero(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    assert not np.any(solve_S(1, FourierSeries.zero(line_set), golden_basis).coeffs)


def test_solve_S_rejects_mean(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    with pytest.raises(FKHullCohomologyError):
        solve_S(1, FourierSeries.constant(line_set, 1.0), golden_basis)
    with pytest.raises(ValueError):
        solve_S(0, FourierSeries.zero(line_set), golden_basis)


def test_multiplier_bound(plane_set: IndexSet, two_frequency_basis: FrequencyBasis) -> None:
    for n in range(-6, 7):
        for sign in (1, -1):
            values = np.abs(multiplier(n, two_frequency_basis, plane_set, sign))
            assert np.all(values <= abs(n) + 1e-12)


def test_L_and_R_agree_on_zero_average(
    plane_set: IndexSet, two_frequency_basis: FrequencyBasis, random_series: SeriesFactory
) -> None:
    f = random_series(plane_set)
    assert apply_L(4, f, two_frequency_basis).sup_distance(apply_R(4, f, two_frequency_basis)) == 0
    assert not np.any(apply_L(0, f, two_frequency_basis).coeffs)
    with pytest.raises(FKHullCohomologyError):
        apply_R(2, f + 1.0, two_frequency_basis)


def test_L_inverts_S(plane_set: IndexSet, two_frequency_basis: FrequencyBasis, random_series: SeriesFactory) -> None:
    f = random_series(plane_set)
    lhs = apply_S(1, apply_L(3, f, two_frequency_basis), two_frequency_basis)
    assert lhs.sup_distance(apply_S(3, f, two_frequency_basis)) < 1e-15


def test_resonant_divisor_policies() -> None:
    index_set = enumerate_indices(1, 6, 1.0)
    basis = FrequencyBasis((1.0,), 2 * np.pi / 3, 0.05)
    eta = FourierSeries.cos_mode(index_set, "1:3", 1.0) + FourierSeries.cos_mode(index_set, "1:1", 1.0)
    assert floor_hits(basis, index_set, DivisorFloor(1e-10)) == 4
    with pytest.raises(FKHullSmallDivisorError) as excinfo:
        solve_S(1, eta, basis, DivisorFloor(1e-10))
    assert excinfo.value.index in (((1, 3),), ((1, -3),))
    clamped = solve_S(1, eta, basis, DivisorFloor(1e-10, FloorPolicy.CLAMP))
    assert abs(clamped.coefficient("1:3")) == pytest.approx(0.5e10, rel=1e-6)


def test_divisor_floor_validation() -> None:
    with pytest.raises(FKHullConfigError, match="positive"):
        DivisorFloor(0.0)
    with pytest.raises(FKHullConfigError, match="policy"):
        DivisorFloor(1e-10, "ignore")  # type: ignore[arg-type]
    assert DivisorFloor(1e-10, "clamp").policy is FloorPolicy.CLAMP  # type: ignore[arg-type]


def test_small_divisors_vanish_at_zero(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    values = small_divisors(golden_basis, line_set)
    assert values[line_set.zero_position] == 0
    assert condition(golden_basis, line_set) == pytest.approx(1 / np.abs(np.delete(values, 0)).min())
