"""Exact-counting tests for the toral automorphism module.

Expected values are produced by independent oracles coded here: a
rational lattice enumeration, the 2x2 trace identity P_n = tr(L^n) - 2,
and characteristic-polynomial eigenvalues.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from trapdyn.linalg import (
    CAT_MAP,
    EnumerationCapError,
    NonHyperbolicError,
    PeriodicCountTable,
    SpectrumSplit,
    ToralAutomorphism,
    count_table_csv,
    entropy,
    enumerate_fixed_points,
    growth_bounds,
    int_det,
    int_matpow,
    is_hyperbolic,
    lefschetz_number,
    periodic_count,
)


def oracle_lattice_count(mat, n):
    """Count x in [0,1)^2 with (L^n - I)x integral, by brute integer enumeration.

    Uses the 2x2 cofactor inverse directly: x = (1/det)[[d,-b],[-c,a]] k, and
    x in [0,1)^2 iff both cofactor combinations lie in [0, det) after a sign
    flip.  Exact in int64 for the sizes tested here.
    """
    pn = np.linalg.matrix_power(np.array(mat, dtype=object), n)
    a = int(pn[0][0]) - 1
    b = int(pn[0][1])
    c = int(pn[1][0])
    d = int(pn[1][1]) - 1
    det = a * d - b * c
    assert det != 0
    sgn = 1 if det > 0 else -1
    lo0, hi0 = min(a, 0) + min(b, 0), max(a, 0) + max(b, 0)
    lo1, hi1 = min(c, 0) + min(d, 0), max(c, 0) + max(d, 0)
    k0 = np.arange(lo0, hi0 + 1, dtype=np.int64)[:, None]
    k1 = np.arange(lo1, hi1 + 1, dtype=np.int64)[None, :]
    num0 = (d * k0 - b * k1) * sgn
    num1 = (-c * k0 + a * k1) * sgn
    ad = abs(det)
    return int(np.sum((num0 >= 0) & (num0 < ad) & (num1 >= 0) & (num1 < ad)))


def oracle_trace_count(n):
    """P_n for the cat map via the exact integer trace of L^n."""
    pn = int_matpow([[2, 1], [1, 1]], n)
    return pn[0][0] + pn[1][1] - 2


class TestHyperbolicity:
    def test_cat_map_hyperbolic(self):
        # roots of x^2 - 3x + 1: (3 +/- sqrt 5)/2, moduli 0.382 and 2.618
        lam = (3 + math.sqrt(5)) / 2
        assert abs(lam + 1 / lam - 3) < 1e-12
        assert is_hyperbolic(CAT_MAP)

    def test_identity_not_hyperbolic(self):
        ident = ToralAutomorphism([[1, 0], [0, 1]])
        assert not is_hyperbolic(ident)

    def test_rotation_not_hyperbolic(self):
        rot = ToralAutomorphism([[0, -1], [1, 0]])
        assert not is_hyperbolic(rot)

    def test_malformed_matrix_rejected(self):
        with pytest.raises(ValueError):
            ToralAutomorphism([[2, 0], [0, 1]])  # det = 2
        with pytest.raises(ValueError):
            ToralAutomorphism([[1]])  # dim < 2


class TestPeriodicCounts:
    def test_cat_first_counts_against_both_oracles(self):
        for n in range(1, 9):
            lattice = oracle_lattice_count([[2, 1], [1, 1]], n)
            trace = oracle_trace_count(n)
            assert lattice == trace
            assert periodic_count(CAT_MAP, n) == lattice

    def test_cat_pinned_sequence(self):
        # frozen after the lattice and trace oracles agreed (test above)
        assert [periodic_count(CAT_MAP, n) for n in range(1, 6)] == [1, 5, 16, 45, 121]

    def test_non_hyperbolic_rejected(self):
        ident = ToralAutomorphism([[1, 0], [0, 1]])
        with pytest.raises(NonHyperbolicError):
            periodic_count(ident, 1)

    def test_inverse_has_same_counts(self):
        inv = CAT_MAP.inverse()
        for n in range(1, 7):
            assert periodic_count(CAT_MAP, n) == periodic_count(inv, n)

    def test_4x4_block_diagonal(self):
        block = ToralAutomorphism(
            [[2, 1, 0, 0], [1, 1, 0, 0], [0, 0, 2, 1], [0, 0, 1, 1]]
        )
        for n in range(1, 5):
            pn = periodic_count(CAT_MAP, n)
            assert periodic_count(block, n) == pn * pn


class TestEnumeration:
    def test_cat_n1_origin_only(self):
        pts = enumerate_fixed_points(CAT_MAP, 1)
        assert pts == [(Fraction(0), Fraction(0))]

    def test_cat_n2_five_points(self):
        pts = enumerate_fixed_points(CAT_MAP, 2)
        assert len(pts) == 5
        assert (Fraction(0), Fraction(0)) in pts
        # each point satisfies (L^2 - I)x in Z^2 exactly
        m = [[4, 3], [3, 1]]  # L^2 - I
        for x in pts:
            for i in range(2):
                v = m[i][0] * x[0] + m[i][1] * x[1]
                assert v.denominator == 1

    def test_lengths_match_counts_up_to_8(self):
        for n in range(1, 9):
            assert len(enumerate_fixed_points(CAT_MAP, n)) == periodic_count(CAT_MAP, n)

    def test_identity_rejected(self):
        ident = ToralAutomorphism([[1, 0], [0, 1]])
        with pytest.raises(NonHyperbolicError):
            enumerate_fixed_points(ident, 1)

    def test_cap_carries_exact_count(self):
        with pytest.raises(EnumerationCapError) as ei:
            enumerate_fixed_points(CAT_MAP, 8, cap=10)
        assert ei.value.count == periodic_count(CAT_MAP, 8)


class TestEntropy:
    def test_cat_entropy_closed_form(self):
        expected = math.log((3 + math.sqrt(5)) / 2)  # 0.9624236501192069
        assert abs(entropy(CAT_MAP) - expected) < 1e-12

    def test_block_diagonal_doubles(self):
        block = ToralAutomorphism(
            [[2, 1, 0, 0], [1, 1, 0, 0], [0, 0, 2, 1], [0, 0, 1, 1]]
        )
        assert abs(entropy(block) - 2 * entropy(CAT_MAP)) < 1e-12

    def test_inverse_same_entropy(self):
        assert abs(entropy(CAT_MAP.inverse()) - entropy(CAT_MAP)) < 1e-12

    def test_power_scaling(self):
        h = entropy(CAT_MAP)
        for k in range(1, 5):
            assert abs(entropy(CAT_MAP.power(k)) / k - h) < 1e-10


class TestLefschetz:
    def test_cat_small_values(self):
        # 2x2 hand oracle: det(I - L) = det([[-1,-1],[-1,0]]) = -1
        assert lefschetz_number(CAT_MAP, 1) == -1
        assert lefschetz_number(CAT_MAP, 2) == -5

    def test_identity_zero(self):
        ident = ToralAutomorphism([[1, 0], [0, 1]])
        assert lefschetz_number(ident, 1) == 0

    def test_modulus_matches_count(self):
        for n in range(1, 7):
            assert abs(lefschetz_number(CAT_MAP, n)) == periodic_count(CAT_MAP, n)

    def test_index_sum_identity(self):
        # Sum over enumerated fixed points of sign(det(I - L^n)) equals det(I - L^n):
        # for the linear model every fixed point carries the same index.
        for n in range(1, 7):
            lef = lefschetz_number(CAT_MAP, n)
            pts = enumerate_fixed_points(CAT_MAP, n)
            sign = 1 if lef > 0 else -1
            assert sign * len(pts) == lef


class TestGrowthBounds:
    def test_cat_bounds_against_closed_form(self):
        # P_n e^{-nh} = 1 + lam^{-2n} - 2 lam^{-n} with lam = (3+sqrt5)/2
        lam = (3 + math.sqrt(5)) / 2
        scaled = [1 + lam ** (-2 * n) - 2 * lam ** (-n) for n in range(1, 11)]
        table = PeriodicCountTable.of(CAT_MAP, 10)
        c1, c2 = growth_bounds(table)
        assert abs(c1 - min(scaled)) < 1e-9
        assert abs(c2 - max(scaled)) < 1e-9
        assert 0.38 <= c1 <= 1.0 and c2 <= 1.0

    def test_single_entry(self):
        h = entropy(CAT_MAP)
        table = PeriodicCountTable(counts=((1, 1),), entropy=h)
        c1, c2 = growth_bounds(table)
        assert c1 == c2 == pytest.approx(math.exp(-h))

    def test_block_diagonal_positive(self):
        block = ToralAutomorphism(
            [[2, 1, 0, 0], [1, 1, 0, 0], [0, 0, 2, 1], [0, 0, 1, 1]]
        )
        c1, _ = growth_bounds(PeriodicCountTable.of(block, 6))
        assert c1 > 0

    def test_empty_table_rejected(self):
        with pytest.raises(ValueError):
            growth_bounds(PeriodicCountTable(counts=(), entropy=1.0))


class TestSpectrumSplit:
    def test_projections_sum_to_identity(self):
        split = SpectrumSplit.of(CAT_MAP)
        assert np.max(np.abs(split.stable_proj + split.unstable_proj - np.eye(2))) <= 1e-12

    def test_rejects_unit_circle(self):
        rot = ToralAutomorphism([[0, -1], [1, 0]])
        with pytest.raises(NonHyperbolicError):
            SpectrumSplit.of(rot)

    def test_projection_invariance(self):
        split = SpectrumSplit.of(CAT_MAP)
        a = CAT_MAP.matrix
        # projections commute with L
        assert np.max(np.abs(a @ split.unstable_proj - split.unstable_proj @ a)) < 1e-10


class TestCsv:
    def test_header_and_first_row(self):
        csv = count_table_csv(CAT_MAP, 3)
        lines = csv.strip().split("\n")
        assert lines[0] == "n,P_n,lefschetz,P_n_scaled"
        n, pn, lef, scaled = lines[1].split(",")
        assert (n, pn, lef) == ("1", "1", "-1")
        assert abs(float(scaled) - math.exp(-entropy(CAT_MAP))) < 1e-12
        # 17 significant digits requested
        assert len(scaled.replace(".", "").replace("-", "").lstrip("0")) >= 16

    def test_deterministic(self):
        assert count_table_csv(CAT_MAP, 5) == count_table_csv(CAT_MAP, 5)


def test_int_det_bareiss_matches_numpy_floats():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = rng.integers(-4, 5, size=(4, 4))
        expected = round(float(np.linalg.det(m.astype(float))))
        assert int_det(m.tolist()) == expected
