import math

import numpy as np
import pytest

from fkhull.entities.state import SolverState
from fkhull.exceptions import FKHullSolverError, FKHullSeriesError
from fkhull.fourier import FourierSeries, FrequencyBasis, evaluate, multiply, shift_orbit, weighted_norm
from fkhull.index_space import IndexSet, enumerate_indices
from fkhull.solvers.abc import SolveOptions, condition_numbers, l_factors, radius_schedule
from fkhull.solvers.short_range import (
    ShortRangeModel,
    ShortRangeSolver,
    newton_step,
    orbit,
    orbit_residual,
    random_perturbation,
    residual,
    solve,
    uniqueness_probe,
    vanishing_check,
)
from tests.conftest import GOLDEN_OMEGA


def gradient_model(index_set: IndexSet, basis: FrequencyBasis, eps: float) -> ShortRangeModel:
    # V = -eps cos(sigma_1) gives U = eps sin(sigma_1)
    return ShortRangeModel.from_potential(FourierSeries.cos_mode(index_set, "1:1", -eps), basis)


def test_radius_schedule() -> None:
    assert radius_schedule(0.08, 0) == 0.08
    assert radius_schedule(0.08, 1) == pytest.approx(0.07)
    assert radius_schedule(0.08, 60) == pytest.approx(0.06)
    assert radius_schedule(0.08, 2, rho_loss=0.04) == pytest.approx(0.05)


def test_zero_potential(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = ShortRangeModel(FourierSeries.zero(line_set), golden_basis)
    final, report = solve(model)
    assert final.iteration == 0
    assert final.eps_n == 0
    assert final.lam == 0
    assert not np.any(final.h.coeffs)
    assert report.converged and report.flags["residual_ok"]


def test_residual_at_zero_is_force(sine_model: ShortRangeModel) -> None:
    state = SolverState.initial(sine_model.index_set, 0.05, lam=0.3)
    e = residual(state, sine_model)
    assert e.sup_distance(sine_model.shell_U + 0.3) < 1e-16


def test_first_step_is_lindstedt(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    eps = 1e-3
    model = ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", eps), golden_basis)
    state, diagnostics = newton_step(SolverState.initial(line_set, 0.05), model, 0.045)
    expected = FourierSeries.sin_mode(line_set, "1:1", eps / (2 * (1 - math.cos(GOLDEN_OMEGA))))
    assert state.h.sup_distance(expected) < 1e-12
    assert diagnostics.delta_lambda == pytest.approx(0.0, abs=1e-12)
    assert state.lam == pytest.approx(0.0, abs=1e-12)
    assert state.rho_n == 0.045
    assert state.iteration == 1


def test_step_is_second_order(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    ratios = []
    for eps in (1e-3, 1e-4, 1e-5):
        model = ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", eps), golden_basis)
        start = SolverState.initial(line_set, 0.05)
        e0 = weighted_norm(residual(start, model), 0.05)
        state, _ = newton_step(start, model, 0.045)
        e1 = weighted_norm(residual(state, model), 0.045)
        ratios.append(e1 / e0**2)
    assert max(ratios) < 10 * min(ratios)
    assert max(ratios) < 100


@pytest.mark.parametrize("eps, expected_doublings", [(1e-2, 3), (1e-3, 2)])
def test_quadratic_convergence(
    eps: float, expected_doublings: int, line_set: IndexSet, golden_basis: FrequencyBasis
) -> None:
    model = ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", eps), golden_basis)
    final, report = solve(model)
    assert report.converged
    assert final.eps_n <= 1e-12
    eps_values = [record.eps for record in report.history]
    doublings = 0
    for before, after in zip(eps_values, eps_values[1:]):
        if after <= 10 * before**1.8:
            doublings += 1
        else:
            # only roundoff may break the quadratic rate
            assert after <= 1e-12
    assert doublings >= expected_doublings
    assert report.iterations <= 8


def test_constant_force(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = ShortRangeModel(FourierSeries.constant(line_set, 0.1), golden_basis)
    final, report = solve(model)
    assert report.converged
    assert final.lam == pytest.approx(-0.1)
    assert not np.any(final.h.coeffs)


@pytest.mark.parametrize("rho", [0.05, 0.2])
def test_l_factors_at_working_radius(rho: float, line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    h = FourierSeries.sin_mode(line_set, "1:1", 0.1) + FourierSeries.cos_mode(line_set, "1:2", 0.02)
    factors = l_factors(h, golden_basis, 1e-12, rho)
    l_back = shift_orbit(factors.l, golden_basis, -1)
    assert weighted_norm(multiply(factors.l, factors.l_inverse) - 1.0, rho) <= 1e-12
    assert weighted_norm(multiply(multiply(factors.l, l_back), factors.twist) - 1.0, rho) <= 1e-12


def test_vanishing_lemma(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = gradient_model(line_set, golden_basis, 0.05)
    assert model.is_gradient
    final, _ = solve(model)
    check = vanishing_check(model, final)
    assert check.applicable and check.passed
    assert abs(final.lam) <= 1e-10


def test_force_without_potential_skips_vanishing(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    force = FourierSeries.sin_mode(line_set, "1:1", 0.02) + FourierSeries.cos_mode(line_set, "1:1", 0.01)
    model = ShortRangeModel(force, golden_basis)
    final, _ = solve(model)
    assert not vanishing_check(model, final).applicable
    assert final.eps_n <= 1e-12


def test_inconsistent_potential(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    with pytest.raises(FKHullSeriesError):
        ShortRangeModel(
            FourierSeries.sin_mode(line_set, "1:1", 0.1), golden_basis, FourierSeries.cos_mode(line_set, "1:1", 0.1)
        )


def test_report_contents(sine_model: ShortRangeModel) -> None:
    final, report = ShortRangeSolver(sine_model).solve(SolverState.initial(sine_model.index_set, 0.05))
    assert report.kind == "short"
    assert report.residual == final.eps_n
    assert report.residual_half is not None and report.residual_half <= 1e-10
    assert report.history[0].eps == report.eps0
    assert report.history[-1].eps == report.residual
    assert report.rho_final == final.rho_n < 0.05
    assert report.margin == pytest.approx(1.0 - weighted_norm(final.h, final.rho_n))
    assert report.condition.c > 0 and report.condition.n_plus >= 1
    assert all(report.flags[name] for name in ("residual_ok", "nondegenerate_ok", "margin_ok", "divisor_ok"))
    assert report.c1_ratio is not None and report.c1_ratio < 10


def test_freeze_lambda(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = gradient_model(line_set, golden_basis, 0.01)
    state, diagnostics = newton_step(
        SolverState.initial(line_set, 0.05, lam=1e-4), model, 0.045, SolveOptions(freeze_lambda=True)
    )
    assert diagnostics.delta_lambda == 0.0
    assert state.lam == 1e-4


def test_divergence_for_large_force(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", 3.0), golden_basis)
    with pytest.raises(FKHullSolverError) as excinfo:
        solve(model, options=SolveOptions(max_iter=10))
    assert excinfo.value.state is not None


def test_nonzero_initial_mean_is_rejected(sine_model: ShortRangeModel) -> None:
    start = SolverState(h=FourierSeries.constant(sine_model.index_set, 0.1), rho_n=0.05)
    with pytest.raises(FKHullSolverError):
        ShortRangeSolver(sine_model).solve(start)


def test_condition_numbers_at_zero(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    numbers = condition_numbers(SolverState.initial(line_set, 0.05), golden_basis)
    assert numbers.n_plus == pytest.approx(1.0)
    assert numbers.n_minus == pytest.approx(1.0)
    assert numbers.c == pytest.approx(1.0)


def test_uniqueness_probe(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = gradient_model(line_set, golden_basis, 0.05)
    final, _ = solve(model)
    same = uniqueness_probe(model, final, 0.0, seed=3)
    assert same.converged and same.distance == 0.0 and same.agree
    nearby = uniqueness_probe(model, final, 1e-4, seed=3)
    assert nearby.agree


def test_random_perturbation_scale(line_set: IndexSet, rng: np.random.Generator) -> None:
    p = random_perturbation(line_set, 0.05, 1e-3, rng)
    assert weighted_norm(p, 0.05) == pytest.approx(1e-3)
    assert p.mean == 0 and p.is_real()


def test_orbit_starts_at_hull(sine_model: ShortRangeModel) -> None:
    final, _ = solve(sine_model)
    m = np.array([0, 1, 5])
    u = orbit(final, sine_model.basis, m)
    assert u[0] == pytest.approx(np.real(evaluate(final.h, (0.0,))))
    assert u[2] == pytest.approx(5 * GOLDEN_OMEGA + np.real(evaluate(final.h, (5 * GOLDEN_OMEGA,))))


def test_two_frequency_orbit_residual(two_frequency_basis: FrequencyBasis) -> None:
    index_set = enumerate_indices(2, 16, 1.0)
    force = FourierSeries.sin_mode(index_set, "1:1", 0.01) + FourierSeries.sin_mode(index_set, "2:1", 0.01)
    model = ShortRangeModel(force, two_frequency_basis)
    final, report = solve(model)
    assert report.converged
    assert np.abs(orbit_residual(model, final, 500)).max() <= 1e-9
