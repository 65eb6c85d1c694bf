import numpy as np
import pytest

from contours import EllipseSpec, hausdorff_distance, sample_ellipse
from errors import GeometryError, ScenarioError
from rotation import confocal_outer, flierl_polvani
from solver import (
    DEFAULT_K_MAX, STEP_TOL, OuterAnsatz, continuation, default_ansatz, finite_difference_jacobian,
    residual_and_jacobian, solve_outer,
)

INNER = EllipseSpec(3.0, 1.0)


def _confocal_guess(k_max=20, scale=1.05, omega=0.1):
    outer = confocal_outer(INNER, flierl_polvani(INNER.q, -0.2).Q1)
    return OuterAnsatz.from_ellipse(outer.scaled(scale), k_max, omega)


def test_ansatz_reproduces_ellipse():
    spec = EllipseSpec(3.0, 2.0)
    ansatz = OuterAnsatz.from_ellipse(spec, 24)
    assert hausdorff_distance(ansatz.to_contour(128), sample_ellipse(spec, 128)) < 1e-10
    assert ansatz.params[-1] == 0.0
    assert ansatz.with_params(ansatz.params) == ansatz


def test_ansatz_rejects_non_positive_radius():
    with pytest.raises(GeometryError):
        OuterAnsatz(0.0, (0.1,), 0.0)


def test_ansatz_center_must_match():
    with pytest.raises(GeometryError):
        OuterAnsatz.from_ellipse(EllipseSpec(3.0, 2.0, 1 + 0j), 4, center=0j)


def test_perturbation_is_reproducible():
    base = _confocal_guess(8)
    a = base.perturbed(np.random.default_rng(3), 0.01)
    b = base.perturbed(np.random.default_rng(3), 0.01)
    assert a == b
    assert a != base


def test_analytic_jacobian_matches_finite_differences():
    ansatz = _confocal_guess(6, scale=1.1, omega=0.12)
    residual, jac = residual_and_jacobian(ansatz, INNER, -0.2, 64)
    fd = finite_difference_jacobian(ansatz, INNER, -0.2, 64)
    assert residual.shape == (2 * 64 + 1,)
    assert jac.shape == (2 * 64 + 1, 6 + 2)
    np.testing.assert_allclose(jac, fd, rtol=1e-6, atol=1e-6 * np.max(np.abs(fd)))


def test_k_max_limited_by_nodes():
    with pytest.raises(ScenarioError):
        residual_and_jacobian(_confocal_guess(20), INNER, -0.2, 64)
    with pytest.raises(ScenarioError):
        residual_and_jacobian(_confocal_guess(17), INNER, -0.2, 64)
    residual, jac = residual_and_jacobian(_confocal_guess(16), INNER, -0.2, 64)
    assert jac.shape == (2 * 64 + 1, 16 + 2)


def test_default_ansatz_is_confocal_closed_form():
    ansatz = default_ansatz(INNER, -0.2)
    assert ansatz.omega == pytest.approx(0.15)
    expected = OuterAnsatz.from_ellipse(confocal_outer(INNER, 0.2), DEFAULT_K_MAX)
    np.testing.assert_allclose(ansatz.betas, expected.betas, atol=1e-14)
    # без замкнутого решения: растянутый внутренний эллипс и Ω = 0
    fallback = default_ansatz(INNER, 0.0, 8)
    assert fallback.omega == 0.0
    assert fallback.r0 == pytest.approx(1.25 * OuterAnsatz.from_ellipse(INNER, 8).r0)


def test_initial_curve_must_contain_inner():
    small = OuterAnsatz.from_ellipse(EllipseSpec(2.0, 1.5), 8)
    with pytest.raises(GeometryError):
        solve_outer(INNER, -0.2, small, n=64)


def test_exact_initial_guess_converges_immediately():
    exact = default_ansatz(INNER, -0.2)
    ansatz, report = solve_outer(INNER, -0.2, exact, n=128)
    assert report.meta["converged"]
    assert report.meta["iterations"] == 1
    assert report.meta["last_step"] < STEP_TOL * exact.r0
    assert ansatz == exact


def test_solver_recovers_confocal_pair():
    ansatz, report = solve_outer(INNER, -0.2, _confocal_guess(), n=128)
    assert report.meta["converged"]
    assert report.meta["iterations"] < 20
    assert ansatz.omega == pytest.approx(0.15, abs=1e-9)
    assert report.meta["q1"] == pytest.approx(0.2, abs=1e-7)
    assert report.meta["c1sq"] == pytest.approx(8.0, abs=1e-7)
    assert report.sup_norm < 1e-8


def test_solver_default_initial_guess():
    ansatz, report = solve_outer(INNER, -0.25, n=128)
    assert report.meta["converged"]
    assert ansatz.omega == pytest.approx(flierl_polvani(INNER.q, -0.25).omega_minus, abs=1e-9)


def test_zero_alpha_has_no_rotating_solution():
    ansatz, report = solve_outer(INNER, 0.0, k_max=8, n=64, max_iter=10)
    assert not report.meta["converged"]
    assert report.meta["iterations"] <= 10


@pytest.mark.slow
def test_solutions_from_perturbed_guesses_coincide():
    exact = default_ansatz(INNER, -0.2, 16)
    reference, ref_report = solve_outer(INNER, -0.2, exact, n=64)
    assert ref_report.meta["converged"]
    rng = np.random.default_rng(11)
    for _ in range(20):
        ansatz, report = solve_outer(INNER, -0.2, exact.perturbed(rng, 0.03), n=64)
        assert report.meta["converged"]
        np.testing.assert_allclose(ansatz.params, reference.params, atol=1e-8)


def test_continuation_requires_monotone_alphas():
    with pytest.raises(ScenarioError):
        continuation(INNER, [-0.1, -0.2, -0.15], _confocal_guess())


@pytest.mark.slow
def test_continuation_tracks_omega_branch():
    alphas = [-0.2, -0.15, -0.1]
    result = continuation(INNER, alphas, _confocal_guess(), n=128)
    assert result.aborted_alpha is None
    expected = [flierl_polvani(INNER.q, a).omega_minus for a in alphas]
    np.testing.assert_allclose(result.omegas, expected, atol=1e-8)
    np.testing.assert_allclose(result.q1s, [flierl_polvani(INNER.q, a).Q1 for a in alphas], atol=1e-7)


def test_continuation_continues_past_closed_form_seed():
    result = continuation(INNER, [-0.2, -0.3], n=128)
    assert result.aborted_alpha is None
    assert result.omegas[-1] == pytest.approx(0.225, abs=1e-8)


@pytest.mark.slow
def test_continuation_from_default_guess_matches_closed_form():
    alphas = [-0.05, -0.1, -0.15, -0.2, -0.25, -0.3]
    result = continuation(INNER, alphas, n=128)
    assert result.aborted_alpha is None
    q2 = INNER.q
    expected = [a * (q2 ** 2 - 1) / (4 * q2 ** 2) for a in alphas]
    np.testing.assert_allclose(result.omegas, expected, atol=1e-8)
