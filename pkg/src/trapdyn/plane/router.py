"""Angular routing: monotone circle diffeomorphisms acting in thin annular slots.

Each strip owns one routing map rho: a degree-one circle diffeomorphism that
compresses the whole circle (minus a thin steep sliver) into the strip's
sector cone.  The map is built as the integral of a positive C-infinity
plateau density, so it is smooth, strictly increasing, and exactly
2-pi-periodic.  The slots are disjoint radial bands; between slots the
deformation is the identity, and every slot sits far from the dyadic collar
circles, so the layer maps still agree with the homothety there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from trapdyn.plane.smooth import smoothstep

TWO_PI = 2.0 * np.pi


@dataclass
class CircleRoute:
    """Monotone circle map rho with dense forward/inverse tables."""

    theta0: float           # lift anchor (start of the fundamental interval)
    grid: np.ndarray        # dense theta grid on [theta0, theta0 + 2pi]
    values: np.ndarray      # rho on the grid (strictly increasing lift)

    def __call__(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        t = np.mod(theta - self.theta0, TWO_PI) + self.theta0
        out = np.interp(t, self.grid, self.values)
        return out + (theta - t)

    def inverse(self, phi: np.ndarray) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        lo, hi = self.values[0], self.values[-1]
        p = np.mod(phi - lo, TWO_PI) + lo
        out = np.interp(p, self.values, self.grid)
        return out + (phi - p)


def build_route(cone: Tuple[float, float], sliver_center: float,
                sliver_width: float = 0.012, n_grid: int = 1 << 17) -> CircleRoute:
    """Compress the circle minus a sliver into the open arc `cone`.

    The derivative profile is a C-infinity plateau: a constant main slope on
    the long arc and a tall plateau across the sliver, with the sliver height
    solved so the map has degree one.
    """
    c_lo, c_hi = cone
    eps = sliver_width
    theta0 = sliver_center + eps / 2.0
    t = np.linspace(theta0, theta0 + TWO_PI, n_grid)
    # sliver occupies the end of the fundamental interval
    s_start = theta0 + TWO_PI - eps
    ramp = 0.25 * eps
    shape = (smoothstep((t - s_start) / ramp)
             * (1.0 - smoothstep((t - (s_start + eps - ramp)) / ramp)))
    main_slope = (c_hi - c_lo) / (TWO_PI - eps)
    density = main_slope + shape  # unit-height sliver, scaled below
    shape_int = np.trapz(shape, t)
    amp = (TWO_PI - main_slope * TWO_PI) / shape_int
    if amp <= 0:
        raise ValueError("cone too wide for a compressive route")
    density = main_slope + amp * shape
    vals = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(t))])
    vals *= TWO_PI / vals[-1]
    vals = vals + c_lo
    return CircleRoute(theta0=theta0, grid=t, values=vals)


@dataclass(frozen=True)
class Slot:
    """One empty routing band: the deformation support of a single phase."""

    strip: int              # 1 or 2
    r_lo: float
    r_hi: float
    ramp: float             # width of the C-infinity shoulders

    def envelope(self, r: np.ndarray) -> np.ndarray:
        return (smoothstep((r - self.r_lo) / self.ramp)
                * (1.0 - smoothstep((r - self.r_hi + self.ramp) / self.ramp)))


@dataclass
class Router:
    """All slots of both strips plus the two routing circle maps."""

    slots: List[Slot]
    route2: CircleRoute
    route1: CircleRoute
    edges: np.ndarray = field(init=False)     # sorted slot inner radii
    outer: np.ndarray = field(init=False)

    def __post_init__(self):
        order = np.argsort([s.r_lo for s in self.slots])
        self.slots = [self.slots[i] for i in order]
        self.edges = np.array([s.r_lo for s in self.slots])
        self.outer = np.array([s.r_hi for s in self.slots])
        self.strips = np.array([s.strip for s in self.slots])
        if np.any(self.edges[1:] < self.outer[:-1]):
            raise ValueError("routing slots overlap radially")

    def min_radius(self) -> float:
        return float(self.edges[0]) if len(self.slots) else np.inf

    def max_radius(self) -> float:
        return float(self.outer[-1]) if len(self.slots) else 0.0

    def _slot_groups(self, r: np.ndarray):
        """Yield (slot, point-indices, envelopes) for points inside slot bands."""
        active = (r >= self.min_radius()) & (r <= self.max_radius())
        if not np.any(active):
            return
        sub = np.where(active)[0]
        idx = np.clip(np.searchsorted(self.edges, r[sub], side="right") - 1,
                      0, len(self.slots) - 1)
        inside = r[sub] <= self.outer[idx]
        sub, idx = sub[inside], idx[inside]
        for k in np.unique(idx):
            j = sub[idx == k]
            env = self.slots[k].envelope(r[j])
            hit = env > 0
            if np.any(hit):
                yield self.slots[k], j[hit], env[hit]

    def forward(self, pts: np.ndarray) -> np.ndarray:
        """Apply the routing twist to every point inside a slot band."""
        r = np.hypot(pts[:, 0], pts[:, 1])
        out = pts.copy()
        for slot, j, env in self._slot_groups(r):
            route = self.route2 if slot.strip == 2 else self.route1
            theta = np.arctan2(pts[j, 1], pts[j, 0])
            new_theta = theta + env * (route(theta) - theta)
            out[j, 0] = r[j] * np.cos(new_theta)
            out[j, 1] = r[j] * np.sin(new_theta)
        return out

    def inverse(self, pts: np.ndarray) -> np.ndarray:
        """Invert the twist: solve theta + E * (rho(theta) - theta) = phi per point."""
        r = np.hypot(pts[:, 0], pts[:, 1])
        out = pts.copy()
        for slot, j, env in self._slot_groups(r):
            route = self.route2 if slot.strip == 2 else self.route1
            phi = np.arctan2(pts[j, 1], pts[j, 0])
            lo = np.full_like(phi, -TWO_PI) + phi
            hi = phi + TWO_PI

            def g(theta):
                return theta + env * (route(theta) - theta)

            # widen brackets until they straddle (g is increasing, degree one)
            for _ in range(4):
                lo = np.where(g(lo) > phi, lo - TWO_PI, lo)
                hi = np.where(g(hi) < phi, hi + TWO_PI, hi)
            for _ in range(52):
                mid = 0.5 * (lo + hi)
                below = g(mid) < phi
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
            theta = 0.5 * (lo + hi)
            out[j, 0] = r[j] * np.cos(theta)
            out[j, 1] = r[j] * np.sin(theta)
        return out
