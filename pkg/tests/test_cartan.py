import itertools
import math

import numpy as np
import pytest

from semireg.cartan import (
    OUT_OF_IMAGE,
    ON_LOCUS,
    FrameError,
    d_flat_residual,
    frame_structure_check,
    first_structural_consistency,
    first_structural_residual,
    frame_signs,
    koszul_decomposition_residual,
    koszul_property_residuals,
    random_field,
    random_polynomial,
    second_structural_residual,
    verify_suite,
)
from semireg.catalog import catalog_entry, euclidean, minkowski
from semireg.curvature import classical_riemann
from semireg.fields import VectorField

PI = math.pi


def coords(spec):
    return [VectorField.coordinate(spec.chart, i) for i in range(spec.dim)]


def test_koszul_decomposition_examples():
    e = euclidean(2)
    E = coords(e)
    r = koszul_decomposition_residual(e.metric, E[0], E[1], E[0], (0.1, 0.2))
    assert r.left == 0.0 and r.right == 0.0
    s = catalog_entry("sphere2")
    E = coords(s)
    r = koszul_decomposition_residual(s.metric, E[0], E[1], E[1], (PI / 4, 0.0))
    assert r.left == pytest.approx(1.0)
    assert r.abs_residual <= 1e-9
    polar = catalog_entry("polar2")
    E = coords(polar)
    for X, Y, Z in itertools.product(E, repeat=3):
        r = koszul_decomposition_residual(polar.metric, X, Y, Z, (0.0, 0.5))
        assert r.abs_residual <= 1e-9
        assert ON_LOCUS in r.flags


def test_d_flat_examples():
    e = euclidean(2)
    Y = VectorField(e.chart, (2.0, -1.0))
    X = VectorField.from_text(e.chart, ["x*y", "1"])
    r = d_flat_residual(e.metric, X, Y, X, (0.3, 0.4))
    assert r.left == 0.0 and r.right == 0.0
    s = catalog_entry("sphere2")
    E = coords(s)
    r = d_flat_residual(s.metric, E[0], E[1], E[1], (PI / 4, 0.0))
    assert r.abs_residual <= 1e-9
    assert r.left == pytest.approx(1.0)


def test_first_structural_examples():
    e = euclidean(2)
    E = coords(e)
    r = first_structural_residual(e.metric, E[0], E[1], E[1], (0.5, 0.5))
    assert r.left == 0.0 and r.right == 0.0
    polar = catalog_entry("polar2")
    E = coords(polar)
    r = first_structural_residual(polar.metric, E[1], E[0], E[1], (2.0, 0.5))
    assert r.passed and r.abs_residual <= 1e-9 and not r.flags


def test_first_structural_true_negative_on_lightcone():
    lc = catalog_entry("lightcone2")
    E = coords(lc)
    r = first_structural_residual(lc.metric, E[1], E[0], E[1], (0.0, 0.5))
    assert not r.passed
    assert r.abs_residual > 0.1
    assert OUT_OF_IMAGE in r.flags and ON_LOCUS in r.flags
    assert not r.excused


def test_first_structural_consistency():
    s = catalog_entry("sphere2")
    rng = np.random.default_rng(5)
    X, Y, Z = (random_field(s.chart, rng) for _ in range(3))
    r = first_structural_consistency(s.metric, X, Y, Z, (1.0, 0.3))
    assert r.passed and r.tol == 1e-10


def test_second_structural_examples():
    e = euclidean(3)
    for quad in itertools.product(coords(e), repeat=4):
        r = second_structural_residual(e.metric, *quad, (0.1, 0.2, 0.3))
        assert r.left == 0.0 and r.right == 0.0
    s = catalog_entry("sphere2")
    E = coords(s)
    p = (PI / 4, 0.0)
    r = second_structural_residual(s.metric, E[0], E[1], E[0], E[1], p)
    assert r.abs_residual <= 1e-9
    assert r.left == pytest.approx(classical_riemann(s.metric, p)[0, 1, 0, 1], abs=1e-9)
    polar = catalog_entry("polar2")
    for quad in itertools.product(coords(polar), repeat=4):
        assert second_structural_residual(polar.metric, *quad, (1.5, 0.0)).abs_residual <= 1e-9


def test_frame_structure_examples():
    e = euclidean(2)
    for r in frame_structure_check(e.metric, coords(e), (0.3, 0.4)):
        assert r.abs_residual == 0.0
    c, s_ = math.cos(0.7), math.sin(0.7)
    rotated = [VectorField(e.chart, (c, s_)), VectorField(e.chart, (-s_, c))]
    for r in frame_structure_check(e.metric, rotated, (0.3, 0.4)):
        assert r.abs_residual <= 1e-15
    sph = catalog_entry("sphere2")
    records = frame_structure_check(sph.metric, sph.frame_fields(), (PI / 3, 0.2))
    assert records
    assert all(r.abs_residual <= 1e-9 for r in records)
    # the non-trivial coframe equation d(sin(theta) dphi) = cos(theta) dtheta ^ dphi
    r = next(r for r in records if r.name == "frame.coframe[1][0,1]")
    assert r.left == pytest.approx(math.cos(PI / 3))


def test_frame_structure_lorentzian_frame():
    m = minkowski(3)
    assert list(frame_signs(m.metric, coords(m), (0.0, 0.0, 0.0))) == [-1.0, 1.0, 1.0]
    f = catalog_entry("friedmann_like")
    records = frame_structure_check(f.metric, f.frame_fields(), (0.8, 0.1, 0.2))
    assert all(r.passed for r in records)


def test_frame_structure_rejects_bad_frames():
    s = catalog_entry("sphere2")
    with pytest.raises(FrameError):
        frame_structure_check(s.metric, coords(s), (1.0, 0.0))  # d_phi has norm sin(theta)
    polar = catalog_entry("polar2")
    with pytest.raises(FrameError):
        frame_structure_check(polar.metric, coords(polar), (0.0, 0.0))


def test_koszul_properties_hold_on_degenerate_locus():
    polar = catalog_entry("polar2")
    rng = np.random.default_rng(11)
    X, Y, Z, X2 = (random_field(polar.chart, rng) for _ in range(4))
    f = random_polynomial(polar.chart, rng)
    records = koszul_property_residuals(polar.metric, X, Y, Z, f, (0.0, 0.4), X2=X2)
    assert len(records) == 10
    assert all(r.passed for r in records)


def test_verify_suite_examples():
    e = euclidean(3)
    res = verify_suite(e.metric, e.random_points(50, 7), seed=7, frame=e.frame_fields())
    assert res.passed
    assert max(res.max_residuals().values()) <= 1e-8
    polar = catalog_entry("polar2")
    res = verify_suite(polar.metric, polar.random_points(30, 7), seed=7, frame=polar.frame_fields())
    assert res.passed and not res.excused


def test_verify_suite_lightcone_failures_only_at_flagged_points():
    lc = catalog_entry("lightcone2")
    pts = [(0.0, 0.5), (0.5, 0.5), (1.0, -0.3), (0.0, -1.0)]
    res = verify_suite(lc.metric, pts, seed=1)
    assert not res.passed
    for r in res.failures:
        assert r.point[0] == 0.0
        assert OUT_OF_IMAGE in r.flags
        assert r.name in ("first_structural", "second_structural")
    assert res.flagged_points() == [(0.0, -1.0), (0.0, 0.5)]


def test_verify_suite_seed_deterministic():
    s = catalog_entry("sphere2")
    a = verify_suite(s.metric, s.random_points(5, 1), seed=4)
    b = verify_suite(s.metric, s.random_points(5, 1), seed=4)
    assert a == b
