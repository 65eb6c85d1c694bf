import numpy as np
import pytest

from constants import BOUNDARY, INSIDE, OUTSIDE
from contours import (
    Contour, EllipseSpec, area, centroid, classify, classify_points,
    distance_to_curve, hausdorff_distance, moment, sample_ellipse,
)
from errors import GeometryError


def test_ellipse_area_and_centroid():
    spec = EllipseSpec(2.0, 1.0, 0.5 + 0.25j, 0.3)
    c = sample_ellipse(spec, 64)
    assert area(c) == pytest.approx(2 * np.pi, rel=1e-13)
    assert abs(centroid(c) - spec.center) < 1e-13


def test_second_moment_of_ellipse():
    c = sample_ellipse(EllipseSpec(2.0, 1.0), 64)
    assert moment(c, 0) == pytest.approx(2.0)
    assert moment(c, 2) == pytest.approx(1.5)


def test_reversed_contour_has_negative_area():
    c = sample_ellipse(EllipseSpec(2.0, 1.0), 32)
    r = c.reversed()
    assert not r.ccw
    assert area(r) == pytest.approx(-area(c))
    assert r.samples[0] == c.samples[0]


def test_from_samples_orients_counterclockwise():
    s = 2 * np.pi * np.arange(32) / 32
    clockwise = np.exp(-1j * s)
    c = Contour.from_samples(clockwise)
    assert c.ccw
    assert area(c) == pytest.approx(np.pi, rel=1e-12)
    np.testing.assert_allclose(np.abs(c.derivs), 1.0, atol=1e-12)


def test_too_few_nodes_rejected():
    s = 2 * np.pi * np.arange(8) / 8
    with pytest.raises(GeometryError):
        Contour.from_samples(np.exp(1j * s))


def test_coincident_nodes_rejected():
    s = 2 * np.pi * np.arange(32) / 32
    z = np.exp(1j * s)
    z[5] = z[4]
    with pytest.raises(GeometryError):
        Contour(z, 1j * np.exp(1j * s))


def test_mismatched_orientation_flag_rejected():
    c = sample_ellipse(EllipseSpec(1.0, 1.0), 32)
    with pytest.raises(GeometryError):
        Contour(c.samples, c.derivs, ccw=False)


def test_invalid_ellipse_rejected():
    with pytest.raises(GeometryError):
        EllipseSpec(0.0, 1.0)
    with pytest.raises(GeometryError):
        EllipseSpec(1.0, float("nan"))


def test_canonical_swaps_axes():
    spec = EllipseSpec(1.0, 2.0, 0j, 0.1).canonical()
    assert (spec.a, spec.b) == (2.0, 1.0)
    assert spec.tilt == pytest.approx(0.1 + np.pi / 2)
    original = EllipseSpec(1.0, 2.0, 0j, 0.1)
    z = original.to_global(0.5 + 1.2j)
    assert spec.level(z) == pytest.approx(original.level(z))


def test_ellipse_focal_quantities():
    spec = EllipseSpec(3.0, 1.0)
    assert spec.q == pytest.approx(0.5)
    assert spec.c2 == pytest.approx(8.0)
    assert spec.tangent_a == pytest.approx(1.25 / 0.75)
    assert spec.tangent_b == pytest.approx(-1.0 / 0.75)
    assert sorted(z.real for z in spec.foci) == pytest.approx([-np.sqrt(8), np.sqrt(8)])


def test_classification():
    c = sample_ellipse(EllipseSpec(2.0, 1.0), 64)
    labels = classify_points([0j, 3 + 0j, c.samples[7], 1.9 + 0j], c)
    assert list(labels) == [INSIDE, OUTSIDE, BOUNDARY, INSIDE]
    assert classify(0.5j, c) == INSIDE


def test_classification_does_not_depend_on_sampling():
    spec = EllipseSpec(2.0, 1.0, 0.2 + 0.1j, 0.4)
    coarse, fine = sample_ellipse(spec, 64), sample_ellipse(spec, 256)
    rng = np.random.default_rng(7)
    points = rng.uniform(-3, 3, 400) + 1j * rng.uniform(-3, 3, 400)
    # точки у самой кривой, по обе стороны
    s = rng.uniform(0, 2 * np.pi, 100)
    edge = spec.to_global(2 * np.cos(s) + 1j * np.sin(s))
    points = np.concatenate([points, spec.center + (edge - spec.center) * rng.choice([0.998, 1.002], 100)])
    points = points[distance_to_curve(points, fine) > 1e-3]
    assert len(points) > 300
    np.testing.assert_array_equal(classify_points(points, coarse), classify_points(points, fine))
    expected = np.where(spec.contains(points), INSIDE, OUTSIDE)
    np.testing.assert_array_equal(classify_points(points, coarse), expected)


def test_contains_is_strict():
    spec = EllipseSpec(2.0, 1.0)
    assert spec.contains(0.5 + 0.5j)
    assert not spec.contains(2.0 + 0j)


def test_evaluate_interpolates_nodes_and_between():
    spec = EllipseSpec(2.0, 1.0)
    c = sample_ellipse(spec, 32)
    np.testing.assert_allclose(c.evaluate(c.params), c.samples, atol=1e-13)
    s = 0.123
    np.testing.assert_allclose(c.evaluate(s)[0], 2 * np.cos(s) + 1j * np.sin(s), atol=1e-12)
    np.testing.assert_allclose(c.evaluate(s, 1)[0], -2 * np.sin(s) + 1j * np.cos(s), atol=1e-12)


def test_length_and_diameter_of_circle():
    c = sample_ellipse(EllipseSpec(1.5, 1.5), 64)
    assert c.length == pytest.approx(3 * np.pi, rel=1e-13)
    assert c.diameter == pytest.approx(3.0)


def test_distance_and_hausdorff():
    c = sample_ellipse(EllipseSpec(1.0, 1.0), 64)
    np.testing.assert_allclose(distance_to_curve([2 + 0j, 0.5j], c), [1.0, 0.5], atol=1e-12)
    bigger = c.scaled(1.1)
    assert hausdorff_distance(c, bigger) == pytest.approx(0.1, abs=1e-12)
    assert hausdorff_distance(c, c.rotated(0.3)) < 1e-12
