"""The core of the plane map: two vertical shears inside the unit disk.

Composed with the halving, the height dynamics on the symmetry axis is
h(y) = H2(H1(y)) / 2 whose positive-side structure is: a repeller at 0, a
single attractor y* inside the lens heights, and a semi-stable fixed point
at exactly 1/4 (quadratic tangency from above), so the segment
gamma = {0} x [-1/4, 1/4] is the maximal invariant set of the core.
The second shear squeezes the rate at the attractor, pinning the Holder
exponent of the semiconjugacy below 1/2.

Both shears displace only the y coordinate, are cut off in |x| alone
(vertical monotonicity is then automatic), and their height displacement
tapers off in |y| with slope > -1, so each shear is a diffeomorphism whose
support stays inside the unit disk.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from trapdyn.plane.smooth import bump, plateau, smoothstep

# frozen design constants (certified by verify_structure and the test suite)
P_HUMP = 0.019          # positive hump feeding the attractor from below
HUMP = (0.006, 0.155, 0.024, 0.06)    # plateau(a, b, wa, wb) of the hump
LOBE_A = 9.0            # quadratic coefficient of the semi-stable tangency at 1/4
LOBE_CAP = 0.016        # smooth cap of the negative lobe
LOBE_WIN = (0.085, 0.42, 0.07, 0.10)  # window of the capped lobe
DOUBLE_END = 0.26       # |y| up to which the displacement doubles heights exactly
DOUBLE_DIP = 1.9        # derivative dip of the doubling profile (slope -> -0.9)
DOUBLE_W = 0.12         # transition widths of the doubling profile derivative
SQUEEZE_S2 = 0.40       # slope of the second shear at its fixed point
SQUEEZE_W2 = 0.10       # half-width of the squeeze window (in doubled heights)
CX_IN, CX_OUT = 0.50, 0.66            # |x|-cutoff of both shears
LENS_Y = (0.145, 0.30)  # lens heights (V2; V1 mirrored)
LENS_X = 0.48


def q1(y) -> np.ndarray:
    """Structural part of the first height map: h1 - id before tapering (odd)."""
    y = np.asarray(y, dtype=float)
    a = np.abs(y)
    hump = P_HUMP * plateau(a, *HUMP)
    u = LOBE_A * (a - 0.25) ** 2
    lobe = -LOBE_CAP * (1.0 - np.exp(-u / LOBE_CAP)) * plateau(a, *LOBE_WIN)
    return np.sign(y) * (hump + lobe)


# ---------------------------------------------------------------------------
# Doubling profile M: M(y) = y exactly on [0, DOUBLE_END], then returns to 0
# and stays 0, with M' >= -(DOUBLE_DIP - 1) = -0.9 so y + M(y) is monotone.
# M' = 1 - DOUBLE_DIP * S((y-a)/w) + (DOUBLE_DIP - 1) * S((y-E)/w); the second
# knot E is solved once so that the integral vanishes at infinity.
# ---------------------------------------------------------------------------

_IS_GRID = np.linspace(0.0, 1.0, 4097)
_IS_VALS = np.concatenate([[0.0], np.cumsum(
    0.5 * (smoothstep(_IS_GRID[1:]) + smoothstep(_IS_GRID[:-1])) * np.diff(_IS_GRID))])


def _int_smoothstep(t) -> np.ndarray:
    """Integral of the smoothstep from -inf to t (0 for t<=0, t-1+c for t>=1)."""
    t = np.asarray(t, dtype=float)
    out = np.interp(np.clip(t, 0.0, 1.0), _IS_GRID, _IS_VALS)
    return np.where(t > 1.0, _IS_VALS[-1] + (t - 1.0), out)


# E with M(inf) = 0: closed form from int_0^1 smoothstep = 1/2 (symmetry).
_DOUBLE_E = (DOUBLE_DIP * DOUBLE_END + DOUBLE_W / 2.0) / (DOUBLE_DIP - 1.0)


def doubling_profile(y) -> np.ndarray:
    a = np.abs(np.asarray(y, dtype=float))
    m = (a
         - DOUBLE_DIP * DOUBLE_W * _int_smoothstep((a - DOUBLE_END) / DOUBLE_W)
         + (DOUBLE_DIP - 1.0) * DOUBLE_W * _int_smoothstep((a - _DOUBLE_E) / DOUBLE_W))
    return np.sign(y) * m


DOUBLE_SUPPORT = _DOUBLE_E + DOUBLE_W  # beyond this |y| the profile is constant


def displacement1(y) -> np.ndarray:
    """Height displacement of the first shear: doubling profile plus structure."""
    return doubling_profile(y) + 2.0 * q1(y)


def cx_cutoff(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 1.0 - smoothstep((np.abs(x) - CX_IN) / (CX_OUT - CX_IN))


@dataclass
class CoreMap:
    """Vertical double shear Psi2 o Psi1 cut off in |x|, supported inside B_1."""

    y_star: float = field(init=False)
    u_star: float = field(init=False)

    def __post_init__(self):
        ys = np.linspace(0.156, 0.245, 20001)
        q = q1(ys)
        down = np.where((q[:-1] > 0) & (q[1:] <= 0))[0]
        if len(down) == 0:
            raise RuntimeError("core height map has no attractor crossing")
        i = down[0]
        self.y_star = float(ys[i] - q[i] * (ys[i + 1] - ys[i]) / (q[i + 1] - q[i]))
        self.u_star = 2.0 * self.y_star

    # -- height maps on a full-cutoff column ----------------------------------

    def big_h1(self, y) -> np.ndarray:
        return np.asarray(y, dtype=float) + displacement1(y)

    def displacement2(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        a = np.abs(u)
        b = bump((a - self.u_star) / SQUEEZE_W2)
        return -np.sign(u) * (1.0 - SQUEEZE_S2) * (a - self.u_star) * b

    def big_h2(self, u) -> np.ndarray:
        return np.asarray(u, dtype=float) + self.displacement2(u)

    def h(self, y) -> np.ndarray:
        """Composed axis height map (full cutoff): the core dynamics in one call."""
        return self.big_h2(self.big_h1(y)) / 2.0

    # -- planar shears ---------------------------------------------------------

    def forward(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        x, y = pts[:, 0], pts[:, 1]
        c = cx_cutoff(x)
        y1_ = y + c * displacement1(y)
        y2 = y1_ + c * self.displacement2(y1_)
        return np.stack([x, y2], axis=1)

    def _invert_1d(self, c: np.ndarray, target: np.ndarray, disp, tol=1e-14):
        """Solve y + c * disp(y) = target per point (monotone in y)."""
        lo = np.minimum(target - 1.5, -np.abs(target) - 1.5)
        hi = np.maximum(target + 1.5, np.abs(target) + 1.5)
        y = target.copy()
        for _ in range(120):
            g = y + c * disp(y) - target
            if np.all(np.abs(g) < tol):
                break
            hi = np.where(g > 0, y, hi)
            lo = np.where(g <= 0, y, lo)
            y = 0.5 * (lo + hi)
        return y

    def inverse(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        x, y2 = pts[:, 0], pts[:, 1]
        c = cx_cutoff(x)
        y1_ = self._invert_1d(c, y2, self.displacement2)
        y = self._invert_1d(c, y1_, displacement1)
        return np.stack([x, y], axis=1)

    def support_radius(self) -> float:
        """Outer radius of the box where the shears can act."""
        return float(np.hypot(CX_OUT, DOUBLE_SUPPORT))

    # -- structure verification -------------------------------------------------

    def verify_structure(self) -> dict:
        """Numeric certificate of the core dynamics; used at build time and in tests."""
        out = {}
        ys = np.linspace(0.02, 0.2495, 30000)
        d = self.h(ys) - ys
        out["crossings_below_quarter"] = int(np.sum(np.abs(np.diff(np.sign(d))) > 0))
        out["y_star"] = self.y_star
        out["lens_margin_lo"] = float(self.h(np.array([LENS_Y[0]]))[0] - LENS_Y[0])
        out["lens_margin_hi"] = float(LENS_Y[1] - self.h(np.array([LENS_Y[1]]))[0])
        out["quarter_fixed_error"] = abs(float(self.h(np.array([0.25]))[0]) - 0.25)
        above = np.linspace(0.2505, 1.6, 8000)
        out["descends_above_quarter"] = bool(np.all(self.h(above) < above))
        eps = 1e-6
        out["attractor_slope"] = float(
            (self.h(np.array([self.y_star + eps])) - self.h(np.array([self.y_star - eps])))
            / (2 * eps))
        # vertical monotonicity across representative columns
        worst = np.inf
        for x0 in (0.0, 0.3, 0.55, 0.62, 0.7, 0.73):
            yy = np.linspace(-1.4, 1.4, 30001)
            col = self.forward(np.stack([np.full_like(yy, x0), yy], axis=1))[:, 1]
            worst = min(worst, float(np.min(np.diff(col))))
        out["min_vertical_step"] = worst
        out["support_radius"] = self.support_radius()
        return out
