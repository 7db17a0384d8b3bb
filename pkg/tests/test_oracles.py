import math

import numpy as np
import pytest

from fkhull.exceptions import FKHullOracleError
from fkhull.fourier import FourierSeries, FrequencyBasis, evaluate
from fkhull.index_space import IndexSet
from fkhull.oracles import CosinePotential, compare_chain, oracle_dense_newton, oracle_finite_chain
from fkhull.solvers.short_range import ShortRangeModel, solve


def test_dense_oracle_without_force(small_line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = ShortRangeModel(FourierSeries.zero(small_line_set), golden_basis)
    h, lam = oracle_dense_newton(model)
    assert not np.any(h.coeffs)
    assert lam == 0.0


def test_dense_oracle_agrees_with_quasi_newton(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", 0.05), golden_basis)
    h, lam = oracle_dense_newton(model)
    final, _ = solve(model)
    assert h.sup_distance(final.h) <= 1e-8
    # a sine force has a potential, so no pinning force is needed
    assert abs(lam) <= 1e-10


def test_dense_oracle_on_a_smaller_set(
    line_set: IndexSet, small_line_set: IndexSet, golden_basis: FrequencyBasis
) -> None:
    model = ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", 0.05), golden_basis)
    h, _ = oracle_dense_newton(model, index_set=small_line_set)
    assert h.index_set == small_line_set


def test_dense_oracle_unknown_cap(small_line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = ShortRangeModel(FourierSeries.sin_mode(small_line_set, "1:1", 0.05), golden_basis)
    with pytest.raises(FKHullOracleError):
        oracle_dense_newton(model, unknown_cap=10)


def test_free_chain_is_uniform() -> None:
    chain = oracle_finite_chain(CosinePotential(()), 1, 3)
    assert chain == pytest.approx(2 * math.pi * np.arange(3) / 3)


def test_chain_needs_coprime_rotation() -> None:
    with pytest.raises(FKHullOracleError):
        oracle_finite_chain(CosinePotential(()), 2, 4)
    with pytest.raises(FKHullOracleError):
        oracle_finite_chain(CosinePotential(()), 1, 0)
    with pytest.raises(FKHullOracleError):
        oracle_finite_chain(CosinePotential(()), 1, 3, initial=np.zeros(4))


def test_potential_from_shell(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    shell = FourierSeries.sin_mode(line_set, "1:1", 0.05) + FourierSeries.cos_mode(line_set, "1:2", 0.02)
    potential = CosinePotential.from_shell(shell, golden_basis)
    assert [m for m, _, _ in potential.terms] == [1, 2]
    u = np.linspace(-4.0, 4.0, 33)
    assert np.allclose(potential.force(u), np.real(evaluate(shell, u[:, None])), atol=1e-15)
    assert potential.force_shell(line_set).sup_distance(shell) < 1e-15
    step = 1e-5
    slope = (potential.force(u + step) - potential.force(u - step)) / (2 * step)
    assert np.allclose(potential.curvature(u), slope, atol=1e-8)
    derivative = (potential.value(u + step) - potential.value(u - step)) / (2 * step)
    assert np.allclose(potential.force(u), derivative, atol=1e-8)


def test_potential_rejections(plane_set: IndexSet, line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    with pytest.raises(FKHullOracleError):
        CosinePotential(((0, 1.0, 0.0),))
    with pytest.raises(FKHullOracleError):
        CosinePotential.from_shell(FourierSeries.constant(line_set, 0.1), golden_basis)
    plane_basis = FrequencyBasis((1.0, 0.5), golden_basis.omega, 0.05)
    with pytest.raises(FKHullOracleError):
        CosinePotential.from_shell(FourierSeries.zero(plane_set), plane_basis)


def test_chain_matches_hull_near_golden_rotation(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", 0.05), golden_basis)
    final, _ = solve(model)
    p, q = 233, 377
    chain = oracle_finite_chain(CosinePotential.from_shell(model.shell_U, golden_basis), p, q)
    rows = compare_chain(final.h, chain, p)
    assert rows.shape == (q, 4)
    assert np.all(rows[:, 0] == np.arange(q))
    assert np.abs(rows[:, 3]).max() <= 1e-4
