"""Trapping-quotient machinery: plaque families, fiber sets, and probes.

The quotient space itself is never materialized; every statement about
the quotient homeomorphism is rephrased as a statement about the fiber
sets A_x = intersection of forward images of center-stable plaques, which
are computed here as point clouds with explicit covering radius.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

Points = np.ndarray


@dataclass(frozen=True)
class Plaque:
    """A parametrized embedded cs-disk, sampled as an ordered polyline (cs = 1).

    points[k] = image of the parameter grid t_k, t in [-1, 1]; points[mid] is
    the center x.  For 2-D disk plaques the quotient code uses a separate
    cell-based path, so only curves are represented here.
    """

    points: np.ndarray  # (m, d) ordered along the curve
    center_index: int

    @property
    def center(self) -> np.ndarray:
        return self.points[self.center_index]


@dataclass(frozen=True)
class TrappedSystem:
    """A diffeomorphism with a trapped plaque family and an unstable direction field.

    eval / eval_inv are vectorized on (n, d) arrays.  plaque(x) returns the
    sampled center-stable disk through x.  unstable_dir is a vectorized unit
    u-frame field (may be None when dim E^u = 0).  torus=True wraps all
    metric computations mod 1.
    """

    eval: Callable[[Points], Points]
    eval_inv: Callable[[Points], Points]
    plaque: Callable[[np.ndarray], Plaque]
    unstable_dir: Optional[Callable[[Points], Points]]
    ph_window: int = 1
    torus: bool = True
    name: str = "system"

    def diff(self, a: Points, b: Points) -> Points:
        d = np.asarray(a) - np.asarray(b)
        if self.torus:
            d = (d + 0.5) % 1.0 - 0.5
        return d

    def dist(self, a: Points, b: Points) -> np.ndarray:
        return np.linalg.norm(self.diff(a, b), axis=-1)

    def point_eval(self, x: np.ndarray) -> np.ndarray:
        return self.eval(np.asarray(x, dtype=float)[None, :])[0]

    def point_eval_inv(self, x: np.ndarray) -> np.ndarray:
        return self.eval_inv(np.asarray(x, dtype=float)[None, :])[0]


@dataclass(frozen=True)
class FiberSet:
    """Discretized fiber A_x as an ordered point cloud with covering radius."""

    points: np.ndarray
    resolution: float
    base_point: np.ndarray
    depth: int

    def diameter(self, sys: TrappedSystem) -> float:
        if len(self.points) == 1:
            return 0.0
        d = _pairwise(sys, self.points, self.points)
        return float(np.max(d))

    def connected_at(self, sys: TrappedSystem, scale: float) -> bool:
        """True when the scale-neighborhood graph on the cloud is connected."""
        n = len(self.points)
        if n <= 1:
            return True
        d = _pairwise(sys, self.points, self.points)
        adj = d <= scale
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            i = stack.pop()
            nbrs = np.where(adj[i] & ~seen)[0]
            seen[nbrs] = True
            stack.extend(nbrs.tolist())
        return bool(np.all(seen))

    def to_csv(self) -> str:
        d = self.points.shape[1]
        base = ",".join(f"{v:.17g}" for v in self.base_point)
        lines = [f"# base={base}, depth={self.depth}, res={self.resolution:.17g}"]
        lines.append(",".join(f"x{i+1}" for i in range(d)))
        for p in self.points:
            lines.append(",".join(f"{v:.17g}" for v in p))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class QuotientProbeReport:
    """Outcome of one numerical certification sweep."""

    property: str
    samples: int
    defect: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.defect <= self.tolerance

    def to_json(self) -> str:
        return json.dumps(
            {
                "property": self.property,
                "samples": self.samples,
                "defect": self.defect,
                "tolerance": self.tolerance,
                "pass": self.passed,
            },
            sort_keys=True,
        )


def _pairwise(sys: TrappedSystem, a: Points, b: Points) -> np.ndarray:
    if sys.torus:
        d = a[:, None, :] - b[None, :, :]
        d = (d + 0.5) % 1.0 - 0.5
        return np.linalg.norm(d, axis=2)
    return cdist(a, b)


def hausdorff(sys: TrappedSystem, a: Points, b: Points) -> float:
    """Brute-force symmetric Hausdorff distance between two point clouds."""
    d = _pairwise(sys, a, b)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def one_sided_hausdorff(sys: TrappedSystem, a: Points, b: Points) -> float:
    """sup over a of dist(a, b)."""
    d = _pairwise(sys, a, b)
    return float(d.min(axis=1).max())


def min_distance(sys: TrappedSystem, a: Points, b: Points) -> float:
    return float(_pairwise(sys, a, b).min())


# ---------------------------------------------------------------------------
# Trapping and domination certificates
# ---------------------------------------------------------------------------


def trapping_margin(sys: TrappedSystem, samples: Sequence[np.ndarray]) -> float:
    """min over samples x of dist(f(plaque_x), boundary of plaque_{f(x)}).

    The boundary of a 1-D plaque is its pair of endpoints; a strictly
    positive margin certifies trapping at the sampled scale.  A sample whose
    image strays off the target plaque (alignment defect beyond a quarter of
    the plaque extent) reports margin 0.
    """
    if len(samples) == 0:
        raise ValueError("need at least one sample point")
    margin = np.inf
    for x in samples:
        x = np.asarray(x, dtype=float)
        pl = sys.plaque(x)
        img = sys.eval(pl.points)
        target = sys.plaque(sys.point_eval(x))
        boundary = target.points[[0, -1]]
        d_bound = _pairwise(sys, img, boundary).min()
        # containment sanity: the image must hug the target curve
        align = _pairwise(sys, img, target.points).min(axis=1).max()
        extent = sys.dist(target.points[0][None, :], target.points[-1][None, :])[0]
        if align > 0.25 * max(extent, 1e-12):
            return 0.0
        margin = min(margin, float(d_bound))
    return float(margin)


def domination_margin(sys: TrappedSystem, samples: Sequence[np.ndarray],
                      h: float = 1e-6) -> float:
    """min over samples of |Df^N v_u| - max(1, |Df^N v_cs|), finite differences."""
    if sys.unstable_dir is None:
        raise ValueError("system has no unstable direction field")
    worst = np.inf
    n = sys.ph_window
    for x in samples:
        x = np.asarray(x, dtype=float)
        vu = sys.unstable_dir(x[None, :])[0]
        pl = sys.plaque(x)
        i = pl.center_index
        vcs = sys.diff(pl.points[min(i + 1, len(pl.points) - 1)], pl.points[i])
        vcs = vcs / max(np.linalg.norm(vcs), 1e-300)
        pts = np.vstack([x, x + h * vu, x + h * vcs])
        for _ in range(n):
            pts = sys.eval(pts)
        gu = np.linalg.norm(sys.diff(pts[1], pts[0])) / h
        gcs = np.linalg.norm(sys.diff(pts[2], pts[0])) / h
        worst = min(worst, gu - max(1.0, gcs))
    return float(worst)


# ---------------------------------------------------------------------------
# Fibers
# ---------------------------------------------------------------------------


def _project_to_polyline(sys: TrappedSystem, pts: Points, curve: Points) -> Tuple[Points, np.ndarray]:
    """Snap each point to the nearest curve sample; returns (snapped, distances)."""
    d = _pairwise(sys, pts, curve)
    idx = d.argmin(axis=1)
    return curve[idx], d[np.arange(len(pts)), idx]


def compute_fiber(sys: TrappedSystem, x, depth: int, res: float,
                  drop_tol_factor: float = 10.0) -> FiberSet:
    """Discretize the nested intersection of pushed-forward plaques at x.

    Seeds a res-grid on the plaque of f^{-depth}(x), pushes it forward,
    intersecting with (projecting onto) the plaque at every intermediate
    backward-orbit point.  The exact center always survives and is included.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    x = np.asarray(x, dtype=float)
    orbit = [x]
    for _ in range(depth):
        orbit.append(sys.point_eval_inv(orbit[-1]))
    plaques = [sys.plaque(z) for z in orbit]

    seed_curve = plaques[depth].points
    seg = sys.dist(seed_curve[1:], seed_curve[:-1])
    arclen = float(np.sum(seg))
    m = max(int(np.ceil(arclen / res)) + 1, 5)
    # resample the seed curve at ambient spacing <= res
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    t_new = np.linspace(0.0, arclen, m)
    idx = np.searchsorted(cum, t_new, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    frac = (t_new - cum[idx]) / np.maximum(seg[idx], 1e-300)
    step = sys.diff(seed_curve[idx + 1], seed_curve[idx])
    pts = seed_curve[idx] + frac[:, None] * step
    if sys.torus:
        pts = np.mod(pts, 1.0)

    drop_tol = drop_tol_factor * res
    for k in range(depth - 1, -1, -1):
        pts = sys.eval(pts)
        snapped, dist = _project_to_polyline(sys, pts, plaques[k].points)
        keep = dist <= drop_tol
        if not np.any(keep):
            raise RuntimeError("fiber intersection emptied out; the seed center must survive")
        pts = snapped[keep]
    pts = np.vstack([pts, x[None, :]])
    if sys.torus:
        pts = np.mod(pts, 1.0)
    # covering radius: half the largest gap between consecutive surviving points
    order = np.argsort(_pairwise(sys, pts, x[None, :])[:, 0])
    gaps = sys.dist(pts[order][1:], pts[order][:-1])
    plaque_spacing = float(np.max(sys.dist(plaques[0].points[1:], plaques[0].points[:-1])))
    covering = max(float(np.max(gaps)) / 2 if len(gaps) else 0.0, plaque_spacing / 2)
    return FiberSet(points=pts, resolution=min(covering, res), base_point=x, depth=depth)


def fiber_equivariance_check(sys: TrappedSystem, x, depth: int, res: float) -> QuotientProbeReport:
    """Hausdorff distance between f(A_x) and A_{f(x)} at equal depth."""
    fx = sys.point_eval(np.asarray(x, dtype=float))
    fiber_x = compute_fiber(sys, x, depth, res)
    fiber_fx = compute_fiber(sys, fx, depth, res)
    pushed = sys.eval(fiber_x.points)
    if sys.torus:
        pushed = np.mod(pushed, 1.0)
    defect = hausdorff(sys, pushed, fiber_fx.points)
    return QuotientProbeReport("fiber_equivariance", len(fiber_x.points), defect, 3 * res)


def partition_check(sys: TrappedSystem, x, y, depth: int, res: float) -> str:
    """'equal' | 'disjoint' | 'violation' for the fiber pair (A_x, A_y)."""
    fx = compute_fiber(sys, x, depth, res)
    fy = compute_fiber(sys, y, depth, res)
    h = hausdorff(sys, fx.points, fy.points)
    if h <= 3 * res:
        return "equal"
    if min_distance(sys, fx.points, fy.points) > 3 * res:
        return "disjoint"
    return "violation"


def flow_unstable(sys: TrappedSystem, x, distance: float, step: float) -> np.ndarray:
    """Flow x along the unit unstable field a given arc distance (RK4)."""
    if sys.unstable_dir is None:
        raise ValueError("system has no unstable direction field")
    p = np.asarray(x, dtype=float)[None, :].copy()
    ref = sys.unstable_dir(p)[0]

    def field(q):
        v = sys.unstable_dir(q)
        sign = np.sign(np.sum(v * ref, axis=1, keepdims=True))
        sign[sign == 0] = 1.0
        return v * sign

    remaining = distance
    while remaining > 1e-14:
        hstep = min(step, remaining)
        k1 = field(p)
        k2 = field(p + 0.5 * hstep * k1)
        k3 = field(p + 0.5 * hstep * k2)
        k4 = field(p + hstep * k3)
        p = p + (hstep / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        remaining -= hstep
    out = p[0]
    return np.mod(out, 1.0) if sys.torus else out


def _transport_to_plaque(sys: TrappedSystem, pts: Points, target: Plaque,
                         step: float, max_arc: float) -> Points:
    """Slide each point along unstable leaves until it crosses the target plaque."""
    curve = target.points
    tangents = sys.diff(curve[min(len(curve) - 1, 1):], curve[:max(len(curve) - 1, 1)])
    # local normal at nearest curve sample
    def signed_offset(q):
        d = _pairwise(sys, q, curve)
        idx = d.argmin(axis=1)
        t = tangents[np.clip(idx, 0, len(tangents) - 1)]
        t = t / np.maximum(np.linalg.norm(t, axis=1, keepdims=True), 1e-300)
        normal = np.stack([-t[:, 1], t[:, 0]], axis=1)
        rel = sys.diff(q, curve[idx])
        return np.sum(rel * normal, axis=1)

    p = pts.copy()
    ref = sys.unstable_dir(p)
    sign_ref = ref[0]

    def field(q):
        v = sys.unstable_dir(q)
        s = np.sign(np.sum(v * sign_ref, axis=1, keepdims=True))
        s[s == 0] = 1.0
        return v * s

    s0 = signed_offset(p)
    direction = None
    travelled = 0.0
    done = np.zeros(len(p), dtype=bool)
    result = p.copy()
    while travelled < max_arc and not np.all(done):
        k1 = field(p)
        if direction is None:
            # pick the orientation that reduces |offset| for the center point
            trial = p + step * k1
            s_trial = signed_offset(trial)
            direction = -1.0 if np.mean(np.abs(s_trial)) > np.mean(np.abs(s0)) else 1.0
        k1 = direction * k1
        k2 = direction * field(p + 0.5 * step * k1)
        k3 = direction * field(p + 0.5 * step * k2)
        k4 = direction * field(p + step * k3)
        p_new = p + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        s1 = signed_offset(p_new)
        crossed = (np.sign(s0) != np.sign(s1)) & ~done
        if np.any(crossed):
            # linear interpolation to the crossing
            frac = np.abs(s0[crossed]) / np.maximum(np.abs(s0[crossed]) + np.abs(s1[crossed]), 1e-300)
            result[crossed] = p[crossed] + frac[:, None] * (p_new[crossed] - p[crossed])
            done[crossed] = True
        p = p_new
        s0 = s1
        travelled += step
    if not np.all(done):
        raise RuntimeError("unstable holonomy left the plaque chart (reach exceeded)")
    return np.mod(result, 1.0) if sys.torus else result


def holonomy_check(sys: TrappedSystem, x, y, depth: int, res: float,
                   tol_factor: float = 5.0, reach: float = 0.2) -> QuotientProbeReport:
    """Transport A_x along unstable leaves onto the plaque of y; compare with A_y."""
    fx = compute_fiber(sys, x, depth, res)
    fy = compute_fiber(sys, y, depth, res)
    target = sys.plaque(np.asarray(y, dtype=float))
    moved = _transport_to_plaque(sys, fx.points, target, step=min(res, 0.01),
                                 max_arc=reach + 1.0)
    defect = hausdorff(sys, moved, fy.points)
    return QuotientProbeReport("holonomy_invariance", len(fx.points), defect,
                               tol_factor * res)


def semicontinuity_check(sys: TrappedSystem, x, approach: Sequence[np.ndarray],
                         depth: int, res: float, tail: int = 3,
                         tol_factor: float = 5.0) -> QuotientProbeReport:
    """One-sided Hausdorff defect of fibers along the tail of an approaching sequence."""
    fx = compute_fiber(sys, x, depth, res)
    defect = 0.0
    count = 0
    for xn in list(approach)[-tail:]:
        fn = compute_fiber(sys, xn, depth, res)
        defect = max(defect, one_sided_hausdorff(sys, fn.points, fx.points))
        count += 1
    return QuotientProbeReport("semicontinuity", count, defect, tol_factor * res)


@dataclass
class ExpansivityOutcome:
    separated: bool
    separation_iterate: Optional[int]
    distances: List[float] = field(default_factory=list)


def expansivity_probe(sys: TrappedSystem, pairs, alpha: float, horizon: int,
                      depth: int, res: float) -> Tuple[QuotientProbeReport, List[ExpansivityOutcome]]:
    """For each pair with disjoint fibers, find |n| <= horizon separating them past alpha.

    Fiber equivariance lets the probe push the depth-0 fiber clouds instead of
    recomputing fibers at every iterate.  Pairs that fail to separate are
    returned as counterexample candidates with all iterate distances.
    """
    outcomes: List[ExpansivityOutcome] = []
    separated_all = True
    for x, y in pairs:
        fx = compute_fiber(sys, x, depth, res).points
        fy = compute_fiber(sys, y, depth, res).points
        dists = [min_distance(sys, fx, fy)]
        found = None
        if dists[0] >= alpha:
            found = 0
        a, b = fx.copy(), fy.copy()
        for n in range(1, horizon + 1):
            a = sys.eval(a)
            b = sys.eval(b)
            dn = min_distance(sys, a, b)
            dists.append(dn)
            if found is None and dn >= alpha:
                found = n
                break
        if found is None:
            a, b = fx.copy(), fy.copy()
            for n in range(1, horizon + 1):
                a = sys.eval_inv(a)
                b = sys.eval_inv(b)
                dn = min_distance(sys, a, b)
                dists.append(dn)
                if dn >= alpha:
                    found = -n
                    break
        outcomes.append(ExpansivityOutcome(found is not None, found, dists))
        separated_all &= found is not None
    defect = 0.0 if separated_all else 1.0
    report = QuotientProbeReport("expansivity_separation", len(outcomes), defect, 0.0)
    return report, outcomes
