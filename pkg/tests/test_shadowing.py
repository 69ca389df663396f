"""Shadowing semiconjugacy tests.

Closed-form oracles: for f(x) = x/2 + c the unique bounded solution of
h o f = d2 o h with h = id + u constant is u = -2c (solve (1/2)(x + u) =
(x/2 + c) + u).  For the torus, f_bar = L + eps*e along an eigenvector e
with eigenvalue lam gives the constant field u = eps/(lam - 1) * e from
the ansatz (L - I)u = eps*e.
"""

import math

import numpy as np
import pytest

from trapdyn.linalg import CAT_MAP, SpectrumSplit, ToralAutomorphism
from trapdyn.shadowing import (
    DisplacementField,
    PlaneMapHandle,
    conjugacy_residual,
    d2,
    fiber_diameter_bound,
    grid_displacement_from_shadowing,
    shadow_plane,
    torus_semiconjugacy,
)


def pure_d2_handle():
    return PlaneMapHandle(eval=lambda x: x / 2.0, eval_inv=lambda x: 2.0 * x,
                          c0_distance_to_d2=1e-15)


def shifted_d2_handle(c):
    c = np.asarray(c, dtype=float)
    return PlaneMapHandle(
        eval=lambda x: x / 2.0 + c,
        eval_inv=lambda x: 2.0 * (x - c),
        c0_distance_to_d2=float(np.linalg.norm(c)) + 1e-15,
    )


class TestShadowPlane:
    def test_identity_case(self):
        f = pure_d2_handle()
        x = np.array([0.3, -1.7])
        assert np.allclose(shadow_plane(f, x, 1), x, atol=1e-14)

    def test_constant_shift_limit(self):
        c = np.array([0.25, -0.1])
        f = shifted_d2_handle(c)
        x = np.array([1.0, 2.0])
        h = shadow_plane(f, x, 40)
        assert np.linalg.norm(h - (x - 2 * c)) < 1e-10

    def test_successive_difference_bound(self):
        c = np.array([0.3, 0.2])
        f = shifted_d2_handle(c)
        k1 = f.c0_distance_to_d2
        rng = np.random.default_rng(3)
        xs = rng.uniform(-2, 2, size=(20, 2))
        for n in range(1, 12):
            a = shadow_plane(f, xs, n)
            b = shadow_plane(f, xs, n + 1)
            assert np.max(np.linalg.norm(b - a, axis=1)) <= k1 * 0.5 ** n + 1e-12

    def test_monotone_improvement(self):
        c = np.array([0.15, -0.2])
        f = shifted_d2_handle(c)
        xs = np.random.default_rng(5).uniform(-1, 1, size=(10, 2))
        exact = xs - 2 * c
        for n in (5, 10, 15):
            e1 = np.max(np.linalg.norm(shadow_plane(f, xs, n) - exact, axis=1))
            e2 = np.max(np.linalg.norm(shadow_plane(f, xs, n + 5) - exact, axis=1))
            assert e2 <= e1 + 1e-12

    def test_handle_validation(self):
        f = shifted_d2_handle([0.2, 0.0])
        grid = np.random.default_rng(1).uniform(-1, 1, size=(50, 2))
        f.validate(grid)
        bad = PlaneMapHandle(eval=lambda x: x / 2.0 + 1.0, eval_inv=lambda x: 2 * (x - 1.0),
                             c0_distance_to_d2=0.1)
        with pytest.raises(ValueError):
            bad.validate(grid)


class TestConjugacyResidual:
    def test_identity_zero(self):
        f = pure_d2_handle()
        field = grid_displacement_from_shadowing(f, (-1, -1), (1, 1), 0.1, depth=5)
        assert conjugacy_residual(field, f) < 1e-13

    def test_translation_case(self):
        c = np.array([0.05, -0.03])
        f = shifted_d2_handle(c)
        field = grid_displacement_from_shadowing(f, (-1, -1), (1, 1), 0.05, depth=40)
        # u is constant, so nearest-node lookup is exact
        assert conjugacy_residual(field, f) < 1e-10

    def test_coverage_error(self):
        # a map throwing images far outside the sampled window
        f = PlaneMapHandle(eval=lambda x: x / 2.0 + 10.0, eval_inv=lambda x: 2 * (x - 10.0),
                           c0_distance_to_d2=15.0)
        field = grid_displacement_from_shadowing(pure_d2_handle(), (-1, -1), (1, 1), 0.2, 3)
        with pytest.raises(ValueError):
            conjugacy_residual(field, f)


class TestTorusSemiconjugacy:
    def test_linear_model_gives_zero(self):
        a = CAT_MAP.matrix
        split = SpectrumSplit.of(CAT_MAP)
        field = torus_semiconjugacy(lambda x: x @ a.T, CAT_MAP, split, grid=50, tol=1e-10)
        assert field.sup_norm() < 1e-12
        assert field.residual < 1e-12

    @pytest.mark.parametrize("which", ["unstable", "stable"])
    def test_constant_shift_along_eigenvector(self, which):
        a = CAT_MAP.matrix
        w, v = np.linalg.eig(a)
        idx = int(np.argmax(np.abs(w))) if which == "unstable" else int(np.argmin(np.abs(w)))
        lam = float(np.real(w[idx]))
        e = np.real(v[:, idx])
        e = e / np.linalg.norm(e)
        eps = 0.01
        split = SpectrumSplit.of(CAT_MAP)
        field = torus_semiconjugacy(lambda x: x @ a.T + eps * e, CAT_MAP, split,
                                    grid=60, tol=1e-10)
        expected = eps / (lam - 1.0) * e
        assert np.max(np.linalg.norm(field.values - expected, axis=1)) < 1e-8
        assert field.residual < 1e-8

    def test_periodicity_across_faces(self):
        # values at wrapped lookups agree exactly: u(x + e_i) resolves to u(x)
        a = CAT_MAP.matrix
        split = SpectrumSplit.of(CAT_MAP)
        eps = 0.01
        e = np.array([1.0, 0.0])
        field = torus_semiconjugacy(lambda x: x @ a.T + eps * e, CAT_MAP, split,
                                    grid=40, tol=1e-9)
        n = 40
        grid_vals = field.values.reshape(n, n, 2)
        # wrapped index of face 0 and face "1" coincide by construction
        assert np.array_equal(grid_vals[0, :, :], field.values[:n])

    def test_non_hyperbolic_rejected(self):
        rot = ToralAutomorphism([[0, -1], [1, 0]])
        with pytest.raises(Exception):
            split = SpectrumSplit.of(CAT_MAP)
            torus_semiconjugacy(lambda x: x, rot, split, grid=10, tol=1e-6)


class TestFiberDiameter:
    def test_linear_model_collapses(self):
        a = CAT_MAP.matrix
        diam = fiber_diameter_bound(lambda x: x @ a.T, CAT_MAP, [0.3, 0.4], depth=25,
                                    radius=0.05, samples_per_axis=11)
        assert diam <= 2 * (2 * 0.05 / 10) + 1e-12  # within two sample spacings

    def test_translation_collapses(self):
        a = CAT_MAP.matrix
        c = np.array([0.003, 0.001])
        diam = fiber_diameter_bound(lambda x: x @ a.T + c, CAT_MAP, [0.1, 0.2], depth=25,
                                    radius=0.05, samples_per_axis=11)
        assert diam <= 2 * (2 * 0.05 / 10) + 1e-12


class TestDisplacementCsv:
    def test_csv_shape_and_sidecar(self):
        field = DisplacementField(
            nodes=np.array([[0.0, 0.0], [0.5, 0.0]]),
            values=np.array([[0.1, 0.2], [0.3, 0.4]]),
            resolution=0.5, residual=1e-9, depth=7,
        )
        csv = field.to_csv()
        lines = csv.strip().split("\n")
        assert lines[0] == "x1,x2,u1,u2"
        assert len(lines) == 3
        side = field.sidecar()
        assert '"depth": 7' in side and '"residual": 1e-09' in side
