"""Exact and floating-point analysis of hyperbolic toral automorphisms.

All counting goes through exact integer arithmetic (Python ints via a
fraction-free Bareiss determinant); floating point is used only for
spectra, entropy and the stable/unstable projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

import numpy as np

# Eigenvalues closer than this to the unit circle reject hyperbolicity.
UNIT_CIRCLE_TOL = 1e-9

# Default cap on |det(L^n - I)| for the lattice enumeration oracle.
ENUMERATION_CAP = 10**6


class NonHyperbolicError(ValueError):
    """Raised when an operation requires a hyperbolic matrix."""


class EnumerationCapError(RuntimeError):
    """Raised when the fixed-point enumeration would exceed its cap."""

    def __init__(self, count: int, cap: int):
        super().__init__(f"fixed-point count {count} exceeds enumeration cap {cap}")
        self.count = count
        self.cap = cap


def _int_matrix(entries) -> List[List[int]]:
    """Validate and convert a square array-like to lists of Python ints."""
    arr = np.asarray(entries)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"matrix must be square, got shape {arr.shape}")
    if not np.all(np.equal(arr, np.round(arr))):
        raise ValueError("matrix entries must be integers")
    return [[int(x) for x in row] for row in arr]


def int_det(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix by fraction-free (Bareiss) elimination."""
    a = [list(map(int, row)) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def int_matmul(a, b) -> List[List[int]]:
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def int_matpow(m: Sequence[Sequence[int]], n: int) -> List[List[int]]:
    """m**n exactly via binary exponentiation (n >= 0)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    size = len(m)
    result = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    base = [list(map(int, row)) for row in m]
    e = n
    while e > 0:
        if e & 1:
            result = int_matmul(result, base)
        base = int_matmul(base, base)
        e >>= 1
    return result


def _frac_inverse(m: Sequence[Sequence[int]]) -> List[List[Fraction]]:
    """Exact inverse of an integer matrix as Fractions (Gauss-Jordan)."""
    n = len(m)
    a = [[Fraction(m[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


@dataclass(frozen=True)
class ToralAutomorphism:
    """An integer d x d matrix with |det| = 1 acting on the d-torus.

    Immutable; safe to share across workers.
    """

    entries: Tuple[Tuple[int, ...], ...]
    dim: int = field(init=False)

    def __init__(self, entries):
        rows = _int_matrix(entries)
        d = len(rows)
        if d < 2:
            raise ValueError("dimension must be at least 2")
        det = int_det(rows)
        if abs(det) != 1:
            raise ValueError(f"|det| must be 1 for a toral automorphism, got {det}")
        object.__setattr__(self, "entries", tuple(tuple(r) for r in rows))
        object.__setattr__(self, "dim", d)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def int_rows(self) -> List[List[int]]:
        return [list(r) for r in self.entries]

    def det(self) -> int:
        return int_det(self.int_rows())

    def power(self, n: int) -> "ToralAutomorphism":
        if n >= 0:
            return ToralAutomorphism(int_matpow(self.int_rows(), n))
        return self.inverse().power(-n)

    def inverse(self) -> "ToralAutomorphism":
        """Exact integer inverse (adjugate divided by det, det = +/-1)."""
        inv = _frac_inverse(self.int_rows())
        rows = [[int(x) for x in row] for row in inv]
        return ToralAutomorphism(rows)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


CAT_MAP = ToralAutomorphism([[2, 1], [1, 1]])


def is_hyperbolic(L: ToralAutomorphism, tol: float = UNIT_CIRCLE_TOL) -> bool:
    """True iff every eigenvalue satisfies | |lam| - 1 | > tol."""
    return bool(np.all(np.abs(np.abs(L.eigenvalues()) - 1.0) > tol))


def _require_hyperbolic(L: ToralAutomorphism) -> None:
    if not is_hyperbolic(L):
        raise NonHyperbolicError("matrix has an eigenvalue on (or too near) the unit circle")


def lefschetz_number(L: ToralAutomorphism, n: int) -> int:
    """det(I - L^n) exactly; its modulus counts fixed points of L^n when hyperbolic."""
    if n < 1:
        raise ValueError("n must be positive")
    pn = int_matpow(L.int_rows(), n)
    d = L.dim
    m = [[(1 if i == j else 0) - pn[i][j] for j in range(d)] for i in range(d)]
    return int_det(m)


def periodic_count(L: ToralAutomorphism, n: int) -> int:
    """Number of fixed points of L^n on the torus, |det(L^n - I)|, exact."""
    _require_hyperbolic(L)
    return abs(lefschetz_number(L, n))


def _adjugate(m: Sequence[Sequence[int]]) -> List[List[int]]:
    """Exact integer adjugate, adj(m) = det(m) * m^{-1}."""
    n = len(m)
    det = int_det(m)
    inv = _frac_inverse(m)
    adj = [[inv[i][j] * det for j in range(n)] for i in range(n)]
    out = []
    for row in adj:
        assert all(x.denominator == 1 for x in row)
        out.append([int(x) for x in row])
    return out


def enumerate_fixed_points(
    L: ToralAutomorphism, n: int, cap: int = ENUMERATION_CAP
) -> List[Tuple[Fraction, ...]]:
    """All x in [0,1)^d with (L^n - I) x integral, as exact rationals.

    Parallelepiped method: candidate integer vectors k are drawn from the
    bounding box of (L^n - I) [0,1)^d, and x = (L^n - I)^{-1} k is kept when
    every coordinate lies in [0,1).  Membership is tested in exact integer
    arithmetic via the adjugate: x in [0,1)^d iff 0 <= sgn(det) * (adj k)_i
    < |det| for every i.  Independent of the determinant identity except
    for the cap check.
    """
    _require_hyperbolic(L)
    if n < 1:
        raise ValueError("n must be positive")
    d = L.dim
    pn = int_matpow(L.int_rows(), n)
    m = [[pn[i][j] - (1 if i == j else 0) for j in range(d)] for i in range(d)]
    det = int_det(m)
    count = abs(det)
    if count > cap:
        raise EnumerationCapError(count, cap)
    adj = _adjugate(m)
    sgn = 1 if det > 0 else -1
    # Bounding box of M [0,1)^d per coordinate: sums of column negatives/positives.
    lo = [sum(min(m[i][j], 0) for j in range(d)) for i in range(d)]
    hi = [sum(max(m[i][j], 0) for j in range(d)) for i in range(d)]
    box = 1
    for a, b in zip(lo, hi):
        box *= b - a + 1
    max_abs = max(max(abs(x) for x in row) for row in adj) * max(
        max(abs(a), abs(b)) for a, b in zip(lo, hi)
    ) * d + 1
    points: List[Tuple[Fraction, ...]] = []
    if box <= 2 * 10**7 and max_abs < 2**62:
        grids = np.meshgrid(*[np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)],
                            indexing="ij")
        ks = np.stack([g.ravel() for g in grids], axis=1)
        vals = ks @ np.array(adj, dtype=np.int64).T * sgn
        keep = np.all((vals >= 0) & (vals < count), axis=1)
        for k in ks[keep]:
            points.append(tuple(
                Fraction(int(sum(adj[r][c] * int(k[c]) for c in range(d))), det)
                for r in range(d)
            ))
    else:
        minv = _frac_inverse(m)

        def rec(i: int, k: List[int]) -> None:
            if i == d:
                x = tuple(sum(minv[r][c] * k[c] for c in range(d)) for r in range(d))
                if all(0 <= xi < 1 for xi in x):
                    points.append(x)
                return
            for v in range(lo[i], hi[i] + 1):
                k.append(v)
                rec(i + 1, k)
                k.pop()

        rec(0, [])
    points.sort()
    return points


def entropy(L: ToralAutomorphism) -> float:
    """Topological entropy sum_{|lam|>1} log|lam| in nats."""
    _require_hyperbolic(L)
    mags = np.abs(L.eigenvalues())
    return float(np.sum(np.log(mags[mags > 1.0])))


@dataclass(frozen=True)
class SpectrumSplit:
    """Stable/unstable spectral data with real projection matrices."""

    stable_values: Tuple[complex, ...]
    unstable_values: Tuple[complex, ...]
    stable_proj: np.ndarray
    unstable_proj: np.ndarray

    @classmethod
    def of(cls, L: ToralAutomorphism, tol: float = UNIT_CIRCLE_TOL) -> "SpectrumSplit":
        w, v = np.linalg.eig(L.matrix)
        if np.any(np.abs(np.abs(w) - 1.0) <= tol):
            raise NonHyperbolicError("eigenvalue within tolerance of the unit circle")
        vinv = np.linalg.inv(v)
        unstable = np.abs(w) > 1.0
        pu = np.real(v[:, unstable] @ vinv[unstable, :])
        ps = np.real(v[:, ~unstable] @ vinv[~unstable, :])
        resid = np.max(np.abs(pu + ps - np.eye(L.dim)))
        if resid > 1e-12:
            raise ArithmeticError(f"projection completeness defect {resid:.3e} exceeds 1e-12")
        return cls(
            stable_values=tuple(w[~unstable]),
            unstable_values=tuple(w[unstable]),
            stable_proj=ps,
            unstable_proj=pu,
        )


@dataclass(frozen=True)
class PeriodicCountTable:
    """Exact counts P_n = |det(L^n - I)| together with the entropy of L."""

    counts: Tuple[Tuple[int, int], ...]
    entropy: float

    @classmethod
    def of(cls, L: ToralAutomorphism, n_max: int) -> "PeriodicCountTable":
        h = entropy(L)
        rows = tuple((n, periodic_count(L, n)) for n in range(1, n_max + 1))
        return cls(counts=rows, entropy=h)


def growth_bounds(table: PeriodicCountTable) -> Tuple[float, float]:
    """Empirical (c1, c2) with c1 e^{nh} <= P_n <= c2 e^{nh} over the listed n."""
    if not table.counts:
        raise ValueError("table is empty")
    if table.entropy <= 0:
        raise ValueError("entropy must be positive")
    scaled = []
    for n, pn in table.counts:
        if pn == 0:
            raise ValueError(f"P_{n} = 0 contradicts hyperbolicity")
        scaled.append(pn * np.exp(-n * table.entropy))
    return float(min(scaled)), float(max(scaled))


def count_table_rows(L: ToralAutomorphism, n_max: int) -> List[Tuple[int, int, int, float]]:
    """Rows (n, P_n, lefschetz, P_n * e^{-n h}) for CSV serialization."""
    h = entropy(L)
    rows = []
    for n in range(1, n_max + 1):
        lef = lefschetz_number(L, n)
        pn = abs(lef)
        rows.append((n, pn, lef, float(pn * np.exp(-n * h))))
    return rows


def count_table_csv(L: ToralAutomorphism, n_max: int) -> str:
    """CSV with header n,P_n,lefschetz,P_n_scaled (scaled at 17 significant digits)."""
    lines = ["n,P_n,lefschetz,P_n_scaled"]
    for n, pn, lef, scaled in count_table_rows(L, n_max):
        lines.append(f"{n},{pn},{lef},{scaled:.17g}")
    return "\n".join(lines) + "\n"
