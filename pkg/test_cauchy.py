import numpy as np
import pytest

from cauchy import (
    BARYCENTRIC, DIRECT, boundary_values, cauchy_disc, cauchy_ellipse, cauchy_integral,
    cauchy_transform, ellipse_gamma_minus, ellipse_gamma_plus, ellipse_transform_values,
    gamma_minus, gamma_plus, jump_residual, schwarz_quadratic_residual,
)
from constants import BOUNDARY, CLOSED_FORM, INSIDE, OUTSIDE, QUADRATURE
from contours import Contour, EllipseSpec, sample_ellipse
from errors import BranchCutError, SideError


def test_disc_closed_form():
    out = cauchy_disc(0j, 1.0, 2 + 0j)
    assert out.value == pytest.approx(0.5)
    assert (out.side, out.method) == (OUTSIDE, CLOSED_FORM)
    inside = cauchy_disc(1 + 1j, 2.0, 1.5 + 1.5j)
    assert inside.value == pytest.approx(0.5 - 0.5j)
    assert inside.side == INSIDE
    assert cauchy_disc(0j, 1.0, 1j).side == BOUNDARY


def test_disc_is_continuous_across_boundary():
    r = 1.3
    for phi in np.linspace(0, 2 * np.pi, 7):
        z = r * np.exp(1j * phi)
        assert cauchy_disc(0j, r, z * (1 - 1e-12)).value == pytest.approx(cauchy_disc(0j, r, z * (1 + 1e-12)).value, abs=1e-9)


def test_ellipse_exterior_value():
    out = cauchy_ellipse(EllipseSpec(2.0, 1.0), 3 + 0j)
    assert out.value.real == pytest.approx(0.7340234, abs=1e-6)
    assert out.value.imag == pytest.approx(0.0, abs=1e-15)
    assert out.side == OUTSIDE


def test_ellipse_interior_is_affine_in_conjugate():
    spec = EllipseSpec(2.0, 1.0)
    z = 0.3 + 0.2j
    # внутри: z̄ − q z для центрированного эллипса без наклона
    assert cauchy_ellipse(spec, z).value == pytest.approx(np.conj(z) - spec.q * z)


def test_ellipse_matches_disc_when_circular():
    spec = EllipseSpec(1.0, 1.0, 0.5 - 0.2j)
    for z in (2 + 1j, 0.6 - 0.1j, -3j):
        assert cauchy_ellipse(spec, z).value == pytest.approx(cauchy_disc(spec.center, 1.0, z).value, abs=1e-13)


def test_ellipse_continuity_on_boundary():
    spec = EllipseSpec(3.0, 1.0, 0.2 + 0.1j, 0.4)
    s = np.linspace(0, 2 * np.pi, 11)
    boundary = spec.to_global(3 * np.cos(s) + 1j * np.sin(s))
    inner = ellipse_transform_values(spec, spec.center + (1 - 1e-7) * (boundary - spec.center))
    outer = ellipse_transform_values(spec, spec.center + (1 + 1e-7) * (boundary - spec.center))
    np.testing.assert_allclose(inner, outer, atol=1e-5)


def test_ellipse_decays_like_area_over_z():
    spec = EllipseSpec(2.0, 1.0)
    z = 1e6 + 0j
    assert cauchy_ellipse(spec, z).value * z == pytest.approx(spec.a * spec.b, rel=1e-6)


def test_branch_cut_rejected():
    with pytest.raises(BranchCutError):
        cauchy_ellipse(EllipseSpec(2.0, 1.0), 1.0 + 0j)


def test_schwarz_quadratic_residual_vanishes():
    spec = EllipseSpec(2.5, 1.0, 0.3j, 0.7)
    for z in (4 + 1j, -3 - 2j, 5j):
        assert abs(schwarz_quadratic_residual(spec, z)) < 1e-12
    with pytest.raises(SideError):
        schwarz_quadratic_residual(spec, spec.center + 0.1)


def test_gamma_jump_on_ellipse_boundary():
    spec = EllipseSpec(2.0, 1.0, 0j, 0.2)
    c = sample_ellipse(spec, 64)
    plus = ellipse_gamma_plus(spec, c.samples)
    minus = ellipse_gamma_minus(spec, c.samples)
    np.testing.assert_allclose(plus - minus, np.conj(c.samples), atol=1e-13)


def test_quadrature_boundary_values_match_closed_form():
    spec = EllipseSpec(2.0, 1.0, 0.1 + 0.2j, 0.5)
    c = sample_ellipse(spec, 128)
    plus, minus = boundary_values(c)
    np.testing.assert_allclose(plus, ellipse_gamma_plus(spec, c.samples), atol=1e-12)
    np.testing.assert_allclose(minus, ellipse_gamma_minus(spec, c.samples), atol=1e-12)
    assert jump_residual(c) < 1e-10


@pytest.mark.parametrize("method", [DIRECT, BARYCENTRIC])
def test_quadrature_transform_far_from_boundary(method):
    spec = EllipseSpec(2.0, 1.0)
    c = sample_ellipse(spec, 128)
    for z in (3 + 0j, 0.4 + 0.3j, -1 + 2j):
        out = cauchy_transform(c, z, method)
        assert out.method == QUADRATURE
        assert out.value == pytest.approx(cauchy_ellipse(spec, z).value, abs=1e-10)


def test_barycentric_near_boundary():
    spec = EllipseSpec(2.0, 1.0)
    c = sample_ellipse(spec, 128)
    near = c.samples[:16] * np.array([1 + 1e-4, 1 - 1e-4] * 8)
    values, _ = cauchy_integral(c, near, BARYCENTRIC)
    np.testing.assert_allclose(-values, ellipse_transform_values(spec, near), atol=1e-9)


def test_transform_on_node_reports_boundary():
    c = sample_ellipse(EllipseSpec(1.0, 1.0), 64)
    out = cauchy_transform(c, c.samples[3])
    assert out.side == BOUNDARY
    assert out.value == pytest.approx(np.conj(c.samples[3]), abs=1e-12)


def test_one_sided_values_reject_wrong_side():
    c = sample_ellipse(EllipseSpec(1.0, 1.0), 64)
    assert gamma_plus(c, 0.2 + 0.1j) == pytest.approx(0.0, abs=1e-12)
    assert gamma_minus(c, 2 + 0j) == pytest.approx(-0.5, abs=1e-12)
    with pytest.raises(SideError):
        gamma_plus(c, 2 + 0j)
    with pytest.raises(SideError):
        gamma_minus(c, 0.1j)


def test_orientation_does_not_change_transform():
    c = sample_ellipse(EllipseSpec(2.0, 1.0), 64)
    z = 2.5 + 0.5j
    assert cauchy_transform(c.reversed(), z).value == pytest.approx(cauchy_transform(c, z).value, abs=1e-13)


@pytest.mark.parametrize("z, plus, minus", [(0.5 + 0j, 1 / 6, None), (2 + 0j, 2 / 3, -4 / 3)])
def test_one_sided_values_on_ellipse(z, plus, minus):
    spec = EllipseSpec(2.0, 1.0)
    c = sample_ellipse(spec, 128)
    assert complex(ellipse_gamma_plus(spec, z)) == pytest.approx(plus, abs=1e-14)
    assert gamma_plus(c, z) == pytest.approx(plus, abs=1e-12)
    if minus is not None:
        assert complex(ellipse_gamma_minus(spec, z)) == pytest.approx(minus, abs=1e-12)
        assert gamma_minus(c, z) == pytest.approx(minus, abs=1e-12)


def test_exterior_value_decays_along_rays():
    spec = EllipseSpec(2.0, 1.0, 0j, 0.3)
    z = 1e6 * np.exp(2j * np.pi * np.arange(8) / 8 + 0.1j)
    np.testing.assert_allclose(ellipse_gamma_minus(spec, z) * z, -spec.a * spec.b, atol=1e-8)


def _wavy_circle(n, eps=0.2, m=5):
    s = 2 * np.pi * np.arange(n) / n
    r = 1 + eps * np.cos(m * s)
    return Contour(r * np.exp(1j * s), (-eps * m * np.sin(m * s) + 1j * r) * np.exp(1j * s), ccw=True)


def test_jump_on_non_elliptic_curve():
    assert jump_residual(_wavy_circle(256)) < 1e-8


def test_jump_converges_with_node_count():
    residuals = [jump_residual(_wavy_circle(n)) for n in (16, 32, 64)]
    assert residuals[1] < residuals[0] / 10
    assert residuals[2] < max(residuals[1] / 10, 1e-12)


def test_interior_average_of_gamma_plus():
    spec = EllipseSpec(2.0, 1.0, 0.3 - 0.2j, 0.4)
    c = sample_ellipse(spec, 128)
    x, w = np.polynomial.legendre.leggauss(16)
    rho, rho_w = (x + 1) / 2, w / 2
    t = 2 * np.pi * np.arange(64) / 64
    local = np.outer(rho, spec.a * np.cos(t) + 1j * spec.b * np.sin(t))
    points = spec.to_global(local).ravel()
    weights = (np.outer(rho * rho_w, np.ones_like(t)) * spec.a * spec.b * 2 * np.pi / 64).ravel()
    values, _ = cauchy_integral(c, points, BARYCENTRIC)
    plus = values + np.conj(points)
    assert np.sum(weights) == pytest.approx(spec.area, rel=1e-13)
    mean_plus = np.sum(plus * weights) / spec.area
    mean_conj = np.sum(np.conj(points) * weights) / spec.area
    assert abs(mean_plus - mean_conj) < 1e-8
