"""C-infinity scalar building blocks shared by the plane construction."""

from __future__ import annotations

import numpy as np


def _exp_side(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing between."""
    t = np.asarray(t, dtype=float)
    a = _exp_side(t)
    b = _exp_side(1.0 - t)
    return a / (a + b + 1e-300)


def bump(x) -> np.ndarray:
    """C-infinity bump: exp(1 - 1/(1-x^2)) inside |x|<1, 0 outside, 1 at 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
    return out


def plateau(y, a: float, b: float, wa: float, wb: float) -> np.ndarray:
    """C-infinity plateau: rises from 0 to 1 over [a, a+wa], falls over [b, b+wb]."""
    y = np.asarray(y, dtype=float)
    return smoothstep((y - a) / wa) * (1.0 - smoothstep((y - b) / wb))


def radial_cutoff(r, inner: float, outer: float) -> np.ndarray:
    """1 for r <= inner, 0 for r >= outer, C-infinity monotone between."""
    r = np.asarray(r, dtype=float)
    return 1.0 - smoothstep((r - inner) / (outer - inner))
