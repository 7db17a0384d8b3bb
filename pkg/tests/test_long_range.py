import math
from typing import Callable

import numpy as np
import pytest

from fkhull.entities.state import SolverState
from fkhull.exceptions import FKHullLinearizedSolveError, FKHullSeriesError
from fkhull.fourier import FourierSeries, FrequencyBasis, derive_alpha, multiply, shift_orbit, weighted_norm
from fkhull.index_space import IndexSet, MultiIndex
from fkhull.solvers.abc import SolveOptions
from fkhull.solvers.long_range import (
    InteractionTerm,
    LongRangeModel,
    apply_G,
    c_series,
    eval_interaction,
    identity_check_y8,
    linearized_bounds,
    newton_step_long,
    potential_of,
    residual_long,
    solve_linearized,
    solve_long,
    verify_long,
)
from fkhull.solvers.short_range import ShortRangeModel, newton_step, residual, solve
from tests.conftest import GOLDEN_OMEGA

SeriesFactory = Callable[..., FourierSeries]

ONE = MultiIndex.unit(1)
ZERO = MultiIndex.zero()


def gap_cosine(L: int, amplitude: float) -> InteractionTerm:
    """amplitude * cos(sigma_L - sigma_0)."""
    return InteractionTerm.cosine((ONE,) + (ZERO,) * (L - 1) + (-ONE,), amplitude)


def decaying_model(
    index_set: IndexSet, basis: FrequencyBasis, L_max: int = 3, eps: float = 0.05
) -> LongRangeModel:
    shell = FourierSeries.sin_mode(index_set, "1:1", eps)
    terms = LongRangeModel.from_short_range(ShortRangeModel(shell, basis)).interactions
    # decay proxy of a gap cosine is 8 |a| e^{2 rho}; aim at M_L = eps 4^-L for rho up to 0.3
    terms += [gap_cosine(L, eps * 4.0**-L / (8 * math.exp(0.6))) for L in range(2, L_max + 1)]
    return LongRangeModel(terms, basis, index_set)


@pytest.fixture
def small_iota_basis() -> FrequencyBasis:
    return FrequencyBasis((1.0,), GOLDEN_OMEGA, 0.05, iota=0.2)


def test_term_must_be_real() -> None:
    with pytest.raises(FKHullSeriesError):
        InteractionTerm(1, {(ONE, ZERO): 1.0})
    with pytest.raises(FKHullSeriesError):
        InteractionTerm(1, {(ONE,): 1.0})
    with pytest.raises(FKHullSeriesError):
        InteractionTerm.elastic(0, 1.0)


def test_terms_of_equal_range_merge(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    terms = [gap_cosine(2, 0.1), gap_cosine(2, 0.2), InteractionTerm.elastic(1, 1.0)]
    model = LongRangeModel(terms, golden_basis, line_set)
    assert [term.L for term in model.interactions] == [1, 2]
    assert model.L_max == 2
    term = model.term(2)
    assert term is not None and term.coeffs[(ONE, ZERO, -ONE)] == pytest.approx(0.15)


def test_potential_of_inverts_derivative(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    shell = FourierSeries.sin_mode(line_set, "1:1", 0.05) + FourierSeries.cos_mode(line_set, "1:3", 0.01)
    V = potential_of(shell, golden_basis)
    assert derive_alpha(V, golden_basis).sup_distance(shell) < 1e-15
    with pytest.raises(FKHullSeriesError):
        potential_of(shell + 1.0, golden_basis)


def test_quadratic_model_at_zero_hull(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = LongRangeModel([InteractionTerm.elastic(1, -1.0)], golden_basis, line_set)
    h = FourierSeries.zero(line_set)
    assert not np.any(residual_long(h, model).coeffs)
    assert identity_check_y8(h, model) == 0.0


def test_constant_energy_has_no_force(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    model = LongRangeModel([InteractionTerm(2, {(ZERO, ZERO, ZERO): 0.3})], golden_basis, line_set)
    h = FourierSeries.sin_mode(line_set, "1:2", 0.01)
    assert weighted_norm(residual_long(h, model), 0.05) == 0.0


def test_eval_interaction_on_site(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    V = FourierSeries.cos_mode(line_set, "1:1", 0.2)
    model = LongRangeModel([InteractionTerm.from_shell(V)], golden_basis, line_set)
    h = FourierSeries.zero(line_set)
    assert eval_interaction(model.interactions[0], h, 0, model).sup_distance(V) < 1e-15
    force = eval_interaction(model.interactions[0], h, 0, model, slots=(0,))
    assert force.sup_distance(derive_alpha(V, golden_basis)) < 1e-15


def test_two_slot_cosine_hand_expansion(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    # H_1 = a cos(sigma_1 - sigma_0) at h = 0: d_0 H_1 = a sin(omega), constant
    a = 0.3
    model = LongRangeModel([gap_cosine(1, a)], golden_basis, line_set)
    h = FourierSeries.zero(line_set)
    d0 = eval_interaction(model.interactions[0], h, 0, model, slots=(0,))
    assert d0.mean == pytest.approx(a * math.sin(GOLDEN_OMEGA), abs=1e-15)
    assert not np.any(d0.without_mean().coeffs)


def test_short_range_reduction_residual(
    line_set: IndexSet, golden_basis: FrequencyBasis, random_series: SeriesFactory
) -> None:
    short = ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", 0.05), golden_basis)
    model = LongRangeModel.from_short_range(short)
    for _ in range(3):
        h = random_series(line_set, scale=1e-2)
        expected = residual(SolverState(h=h, rho_n=0.05), short)
        assert residual_long(h, model).sup_distance(expected) <= 1e-12


def test_short_range_reduction_step(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    V = FourierSeries.cos_mode(line_set, "1:1", -0.02)
    short = ShortRangeModel.from_potential(V, golden_basis)
    model = LongRangeModel.from_short_range(short)
    start = SolverState.initial(line_set, 0.05)
    first, _ = newton_step(start, short, 0.045, SolveOptions(freeze_lambda=True))
    state = first.replace(rho_n=0.05, iteration=0)
    expected, _ = newton_step(state, short, 0.045, SolveOptions(freeze_lambda=True))
    actual, diagnostics = newton_step_long(state, model, 0.045)
    assert actual.h.sup_distance(expected.h) <= 1e-12
    assert diagnostics.fixed_point_iterations == 2


def test_c_series_of_reduction(
    line_set: IndexSet, golden_basis: FrequencyBasis, random_series: SeriesFactory
) -> None:
    model = LongRangeModel.from_short_range(
        ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", 0.05), golden_basis)
    )
    h = random_series(line_set, scale=1e-2)
    l = 1.0 + derive_alpha(h, golden_basis)
    expected = multiply(l, shift_orbit(l, golden_basis, -1))
    assert c_series(0, 1, 1, h, model).sup_distance(expected) < 1e-14
    with pytest.raises(ValueError):
        c_series(0, 2, 1, h, model)


def test_G_vanishes_without_long_terms(
    line_set: IndexSet, golden_basis: FrequencyBasis, random_series: SeriesFactory
) -> None:
    model = LongRangeModel.from_short_range(
        ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", 0.05), golden_basis)
    )
    h, x = random_series(line_set), random_series(line_set)
    assert not np.any(apply_G(h, x, model).coeffs)


def test_single_range_two_term_assembly(small_line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    # at h = 0 only the pair j=0, k=2 contributes: L^+_2 (C_{0,2,2} R^-_{-2} x)
    a = 0.01
    model = LongRangeModel([InteractionTerm.elastic(1, -1.0), gap_cosine(2, a)], golden_basis, small_line_set)
    h = FourierSeries.zero(small_line_set)
    x = FourierSeries.cos_mode(small_line_set, "1:1", 1.0) + FourierSeries.sin_mode(small_line_set, "1:2", 0.5)
    phases = golden_basis.phases(small_line_set)
    # d_2 d_0 of a cos(sigma_2 - sigma_0) is a cos(2 omega) at h = 0
    hessian = a * math.cos(2 * GOLDEN_OMEGA)
    multiplier = (np.exp(2j * phases) - 1) / (np.exp(1j * phases) - 1)
    back = (np.exp(-2j * phases) - 1) / (np.exp(-1j * phases) - 1)
    multiplier[small_line_set.zero_position] = 0
    back[small_line_set.zero_position] = 0
    expected = multiplier * hessian * back * x.coeffs
    assert np.allclose(apply_G(h, x, model).coeffs, expected, atol=1e-15)


def test_identity_on_random_hulls(
    line_set: IndexSet, golden_basis: FrequencyBasis, random_series: SeriesFactory
) -> None:
    model = decaying_model(line_set, golden_basis, L_max=2)
    for _ in range(3):
        h = random_series(line_set, scale=1e-3)
        scale = max(1.0, weighted_norm(residual_long(h, model), 0.05))
        assert identity_check_y8(h, model) <= 1e-10 * scale


def test_h5_proxies(line_set: IndexSet, small_iota_basis: FrequencyBasis) -> None:
    reduction = LongRangeModel.from_short_range(
        ShortRangeModel(FourierSeries.sin_mode(line_set, "1:1", 0.05), small_iota_basis)
    )
    h = FourierSeries.zero(line_set)
    bounds = linearized_bounds(h, reduction)
    assert bounds.beta == 0.0 and bounds.h5_beta_ok
    assert bounds.t_bound == pytest.approx(1.0)

    small = linearized_bounds(h, decaying_model(line_set, small_iota_basis))
    assert small.beta_product < 0.5

    big = LongRangeModel(reduction.interactions + [gap_cosine(4, 1.0)], small_iota_basis, line_set)
    flagged = linearized_bounds(h, big)
    assert flagged.beta >= 4**4
    assert not flagged.h5_beta_ok and not flagged.h5_ok
    with pytest.raises(FKHullLinearizedSolveError):
        solve_long(big)


def test_long_range_solve(line_set: IndexSet, small_iota_basis: FrequencyBasis) -> None:
    model = decaying_model(line_set, small_iota_basis)
    final, report = solve_long(model)
    assert report.kind == "long"
    assert report.converged and final.eps_n <= 1e-12
    assert report.iterations <= 10
    assert report.linearized is not None
    assert report.linearized.beta_product < 0.5
    assert report.flags["h5_ok"] == report.linearized.h5_ok
    assert final.lam == 0.0


@pytest.mark.parametrize("eps", [1e-3, 1e-4])
def test_long_range_quadratic_decay(eps: float, line_set: IndexSet, small_iota_basis: FrequencyBasis) -> None:
    final, report = solve_long(decaying_model(line_set, small_iota_basis, eps=eps))
    assert report.converged and final.eps_n <= 1e-12
    eps_values = [record.eps for record in report.history]
    assert eps_values[0] == pytest.approx(eps, rel=0.2)
    doublings = 0
    for before, after in zip(eps_values, eps_values[1:]):
        if after <= 10 * before**1.8:
            doublings += 1
        else:
            assert after <= 1e-12
    assert doublings >= 1
    assert report.iterations <= 4


def test_reduction_solve_matches_short_range(line_set: IndexSet, golden_basis: FrequencyBasis) -> None:
    short = ShortRangeModel.from_potential(FourierSeries.cos_mode(line_set, "1:1", -0.05), golden_basis)
    expected, _ = solve(short)
    final, _ = solve_long(LongRangeModel.from_short_range(short))
    assert final.h.sup_distance(expected.h) <= 1e-9


def test_verify_long_reports_without_iterating(line_set: IndexSet, small_iota_basis: FrequencyBasis) -> None:
    model = decaying_model(line_set, small_iota_basis)
    final, _ = solve_long(model)
    report = verify_long(final.replace(residual=None), model)
    assert report.iterations == final.iteration
    assert report.history == []
    assert report.flags["residual_ok"]


def test_solve_linearized_matches_step(line_set: IndexSet, small_iota_basis: FrequencyBasis) -> None:
    model = decaying_model(line_set, small_iota_basis)
    h = FourierSeries.zero(line_set)
    e = residual_long(h, model)
    eta = solve_linearized(h, e, model)
    state, _ = newton_step_long(SolverState.initial(line_set, 0.05), model, 0.045)
    # l = 1 at h = 0, so the correction is eta - <eta>
    assert state.h.sup_distance(eta.real_projection().without_mean()) < 1e-14
