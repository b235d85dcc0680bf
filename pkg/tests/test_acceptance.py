"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the summary section at
the end lists every criterion) or ``python3 tests/test_acceptance.py``.
"""

import itertools
import math
import subprocess
import sys

import numpy as np
import pytest

from semireg import expr as ex
from semireg.cartan import (
    OUT_OF_IMAGE,
    d_flat_residual,
    frame_structure_check,
    first_structural_residual,
    koszul_decomposition_residual,
    koszul_property_residuals,
    random_field,
    random_polynomial,
    second_structural_residual,
)
from semireg.catalog import catalog, catalog_entry
from semireg.cli import cmd_verify
from semireg.curvature import classical_riemann, riemann_table, symmetry_check
from semireg.fields import Chart, VectorField
from semireg.koszul import RADICAL_STATIONARY, NOT_RADICAL_STATIONARY, radical_stationary_check, semi_regular_probe

TOL = 1e-8
SEED = 20240601
CATALOG = catalog()
# points where the catalog's degenerate families lose rank
ON_LOCUS = {
    "polar2": [(0.0, 0.5), (0.0, -1.3)],
    "lightcone2": [(0.0, 0.5), (0.0, 1.7)],
    "friedmann_like": [(0.0, 0.1, 0.2), (0.0, -1.0, 0.4)],
}


def coords(spec):
    return [VectorField.coordinate(spec.chart, i) for i in range(spec.dim)]


def sample_set(count, seed):
    """``count`` (metric, fields, scalar, point) samples cycling over the catalog.

    Points come from each entry's box, which keeps the degenerate families
    off their degeneracy locus.
    """
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        spec = CATALOG[k % len(CATALOG)]
        box = spec.box
        p = tuple(float(rng.uniform(lo, hi)) for lo, hi in box)
        fields = [random_field(spec.chart, rng) for _ in range(4)]
        f = random_polynomial(spec.chart, rng)
        out.append((spec, fields, f, p))
    return out


@pytest.fixture(scope="module")
def samples():
    return sample_set(504, SEED)


def test_criterion_01_koszul_properties(samples, acceptance):
    worst, names, count = 0.0, set(), 0
    for spec, (X, Y, Z, X2), f, p in samples:
        for r in koszul_property_residuals(spec.metric, X, Y, Z, f, p, X2=X2):
            worst = max(worst, r.rel_residual)
            names.add(r.name)
        count += 1
    again = sample_set(5, SEED)
    deterministic = all(
        a[3] == b[3] and a[2] == b[2] for a, b in zip(again, samples[:5])
    )
    ok = count >= 500 and worst <= TOL and len(names) == 10 and deterministic
    acceptance(1, ok, "eight Koszul-form properties (10 identities)", f"{count} samples, max rel residual {worst:.2e}")


def test_criterion_02_decomposition(samples, acceptance):
    worst, count = 0.0, 0
    cases = [(spec, fs, p) for spec, fs, _, p in samples]
    rng = np.random.default_rng(SEED + 2)
    for name, pts in ON_LOCUS.items():
        spec = catalog_entry(name)
        for p in pts:
            for _ in range(5):
                cases.append((spec, [random_field(spec.chart, rng) for _ in range(3)], p))
    on_locus = 0
    for spec, fs, p in cases:
        X, Y, Z = fs[:3]
        for r in (koszul_decomposition_residual(spec.metric, X, Y, Z, p),
                  d_flat_residual(spec.metric, X, Y, Z, p)):
            worst = max(worst, r.rel_residual)
            on_locus += "on-locus" in r.flags
        count += 1
    ok = worst <= TOL and on_locus > 0
    acceptance(2, ok, "Koszul decomposition and d(flat) identity",
               f"{count} samples ({on_locus // 2} on-locus), max rel residual {worst:.2e}")


def test_criterion_03_first_structural(acceptance):
    names = ["euclidean2", "euclidean3", "euclidean4", "minkowski2", "minkowski3", "minkowski4",
             "sphere2", "polar2", "degenerate_const", "degenerate_const_1_1_1"]
    rng = np.random.default_rng(SEED + 3)
    worst, count = 0.0, 0
    for name in names:
        spec = catalog_entry(name)
        for p in spec.random_points(20, SEED + 3):
            X, Y, Z = (random_field(spec.chart, rng) for _ in range(3))
            r = first_structural_residual(spec.metric, X, Y, Z, p)
            worst = max(worst, r.rel_residual)
            count += 1
    lc = catalog_entry("lightcone2")
    E = coords(lc)
    neg = first_structural_residual(lc.metric, E[1], E[0], E[1], (0.0, 0.5))
    true_negative = (not neg.passed) and OUT_OF_IMAGE in neg.flags
    ok = worst <= TOL and true_negative
    acceptance(3, ok, "first structural equation; lightcone2 at u=0 flagged failure",
               f"{count} samples, max rel residual {worst:.2e}; lightcone2 residual {neg.rel_residual:.3f} "
               f"flags {','.join(neg.flags)}")


def test_criterion_04_orthonormal_frames(acceptance):
    worst_frame, worst_anti, count = 0.0, 0.0, 0
    for name in ("euclidean2", "euclidean3", "sphere2"):
        spec = catalog_entry(name)
        for p in spec.random_points(25, SEED + 4):
            for r in frame_structure_check(spec.metric, spec.frame_fields(), p):
                if "antisymmetry" in r.name:
                    worst_anti = max(worst_anti, r.abs_residual)
                else:
                    worst_frame = max(worst_frame, r.rel_residual)
            count += 1
    ok = worst_frame <= TOL and worst_anti <= 1e-10
    acceptance(4, ok, "orthonormal-frame structure equations and connection antisymmetry",
               f"{count} points, coframe {worst_frame:.2e}, antisymmetry {worst_anti:.2e}")


def test_criterion_05_second_structural(acceptance):
    names = ["euclidean2", "euclidean3", "minkowski2", "minkowski3", "sphere2", "polar2"]
    rng = np.random.default_rng(SEED + 5)
    worst, count = 0.0, 0
    for name in names:
        spec = catalog_entry(name)
        for p in spec.random_points(20, SEED + 5):
            X, Y, Z, T = (random_field(spec.chart, rng) for _ in range(4))
            worst = max(worst, second_structural_residual(spec.metric, X, Y, Z, T, p).rel_residual)
            count += 1
    ok = count >= 100 and worst <= TOL
    acceptance(5, ok, "second structural equation", f"{count} samples, max rel residual {worst:.2e}")


def test_criterion_06_curvature_oracle(acceptance):
    names = ["euclidean2", "euclidean3", "euclidean4", "minkowski2", "minkowski3", "minkowski4", "sphere2"]
    worst, count = 0.0, 0
    for k in range(100):
        spec = catalog_entry(names[k % len(names)])
        p = spec.random_points(1, SEED + 6 + k)[0]
        R = riemann_table(spec.metric, p).R
        C = classical_riemann(spec.metric, p)
        scale = max(1.0, float(np.abs(C).max()))
        worst = max(worst, float(np.abs(R - C).max()) / scale)
        count += 1
    sphere = catalog_entry("sphere2")
    worst_sin = 0.0
    for theta in (math.pi / 6, math.pi / 4, math.pi / 3):
        R = riemann_table(sphere.metric, (theta, 0.0)).R
        worst_sin = max(worst_sin, abs(abs(R[0, 1, 0, 1]) - math.sin(theta) ** 2))
    ok = worst <= TOL and worst_sin <= TOL
    acceptance(6, ok, "curvature table vs classical Christoffel curvature",
               f"{count} points, max rel diff {worst:.2e}; sphere |R0101| - sin^2 {worst_sin:.2e}")


def test_criterion_07_symmetries(acceptance):
    worst, count = 0.0, 0
    for spec in CATALOG:
        for p in spec.random_points(10, SEED + 7):
            worst = max(worst, symmetry_check(riemann_table(spec.metric, p)).max_relative())
            count += 1
    acceptance(7, worst <= TOL, "curvature symmetries on every catalog metric",
               f"{count} off-locus points, max residual/scale {worst:.2e}")


def test_criterion_08_classification(acceptance):
    polar = catalog_entry("polar2")
    pts = [(u, v) for u in (-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0) for v in (-0.7, 0.5)]
    prep = radical_stationary_check(polar.metric, pts)
    polar_ok = prep.verdict == RADICAL_STATIONARY and prep.max_residual <= 1e-10 and any(
        pc.rank == 1 for pc in prep.points)
    lc = radical_stationary_check(catalog_entry("lightcone2").metric, [(0.0, 0.5)])
    lc_ok = (lc.verdict == NOT_RADICAL_STATIONARY and abs(lc.max_residual - 0.5) <= 1e-12
             and lc.points[0].rank == 1)
    nondeg = [s for s in CATALOG if s.expect == "non-degenerate"]
    nd_ok = all(radical_stationary_check(s.metric, s.random_points(10, SEED)).radical_stationary for s in nondeg)
    ok = polar_ok and lc_ok and nd_ok
    acceptance(8, ok, "radical-stationary classification",
               f"polar2 max residual {prep.max_residual:.1e}; lightcone2 residual {lc.max_residual!r} "
               f"rank {lc.points[0].rank}; {len(nondeg)} non-degenerate metrics")


def test_criterion_09_probe(acceptance):
    polar = catalog_entry("polar2")
    E = coords(polar)
    pr = semi_regular_probe(polar.metric, E[1], E[0], E[0], E[1], (-1.0, 0.5), (1.0, 0.5))
    ok = (abs(pr.left_limit - 1.0) <= 1e-6 and abs(pr.right_limit - 1.0) <= 1e-6
          and pr.pointwise == 0.0 and pr.limits_agree and not pr.pointwise_matches_limit)
    acceptance(9, ok, "semi-regular probe on polar2 across u=0",
               f"limits {pr.left_limit!r} / {pr.right_limit!r}, pointwise {pr.pointwise!r}")


def test_criterion_10_jet_vs_finite_differences(acceptance):
    rng = np.random.default_rng(SEED + 10)
    h = 1e-5
    worst_g, worst_h = 0.0, 0.0
    for k in range(200):
        n = 1 + k % 3
        chart = Chart(("x", "y", "z")[:n])
        e = random_polynomial(chart, rng, degree=int(rng.integers(1, 5)))
        p = rng.uniform(-1.5, 1.5, n)
        j = ex.eval_jet(e, tuple(p))
        f = lambda q: ex.eval_value(e, tuple(q))  # noqa: E731
        I = np.eye(n) * h
        g_fd = np.array([(f(p + I[i]) - f(p - I[i])) / (2 * h) for i in range(n)])
        H_fd = np.array([[(f(p + I[i] + I[m]) - f(p + I[i] - I[m]) - f(p - I[i] + I[m]) + f(p - I[i] - I[m]))
                          / (4 * h * h) for m in range(n)] for i in range(n)])
        worst_g = max(worst_g, float(np.abs(j.grad - g_fd).max()) / max(1.0, float(np.abs(g_fd).max())))
        worst_h = max(worst_h, float(np.abs(j.hess - H_fd).max()) / max(1.0, float(np.abs(H_fd).max())))
    ok = worst_g <= 1e-6 and worst_h <= 1e-4
    acceptance(10, ok, "jet derivatives vs central finite differences",
               f"200 polynomials, gradient {worst_g:.2e}, Hessian {worst_h:.2e}")


def test_criterion_11_determinism(tmp_path, acceptance):
    spec = catalog_entry("sphere2")
    pts = spec.random_points(10, 3)
    a = cmd_verify(spec, pts, seed=3)[0].render().encode()
    b = cmd_verify(spec, pts, seed=3)[0].render().encode()
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.txt"
        subprocess.run([sys.executable, "-m", "semireg", "verify", "polar2", "--points", "8", "--seed", "5",
                        "--report", str(path)], capture_output=True, check=False)
        outs.append(path.read_bytes())
    ok = a == b and outs[0] == outs[1] and len(outs[0]) > 0
    acceptance(11, ok, "verify reports byte-identical across runs",
               f"in-process {len(a)} bytes, CLI {len(outs[0])} bytes")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
