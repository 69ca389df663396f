"""Semiconjugacies by pseudo-orbit shadowing.

Two constructions live here: the one-sided plane limit h = lim d2^n f^{-n}
onto the homothety d2(x) = x/2, and the torus fixed-point iteration that
solves h_bar o f_bar = L o h_bar for a lift f_bar of a map isotopic to a
hyperbolic automorphism L.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from trapdyn.linalg import NonHyperbolicError, SpectrumSplit, ToralAutomorphism, is_hyperbolic

Points = np.ndarray  # (n, d) float array


def d2(x: Points) -> Points:
    """The plane homothety x / 2."""
    return np.asarray(x, dtype=float) / 2.0


@dataclass(frozen=True)
class PlaneMapHandle:
    """A plane diffeomorphism presented by vectorized eval / eval_inv callables.

    c0_distance_to_d2 is a bound K1 with sup |f(x) - x/2| <= K1 on the region
    of interest; it drives every shadowing error bound (alpha(K) = 2 K1).
    """

    eval: Callable[[Points], Points]
    eval_inv: Callable[[Points], Points]
    c0_distance_to_d2: float

    def validate(self, grid: Points, roundtrip_tol: float = 1e-10) -> None:
        grid = np.atleast_2d(np.asarray(grid, dtype=float))
        fx = self.eval(grid)
        back = self.eval_inv(fx)
        rt = float(np.max(np.linalg.norm(back - grid, axis=1)))
        if rt > roundtrip_tol:
            raise ValueError(f"inverse roundtrip defect {rt:.3e} exceeds {roundtrip_tol:.1e}")
        dev = float(np.max(np.linalg.norm(fx - grid / 2.0, axis=1)))
        if dev > self.c0_distance_to_d2:
            raise ValueError(
                f"sup|f - d2| = {dev:.6g} exceeds declared K1 = {self.c0_distance_to_d2:.6g}"
            )


def shadow_plane(f: PlaneMapHandle, x: Points, depth: int) -> Points:
    """h_depth(x) = d2^depth(f^{-depth}(x)).

    The exact semiconjugacy h satisfies |h_depth(x) - h(x)| <= 2 K1 2^-depth;
    the past pseudo-orbit alone determines the limit.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    single = np.asarray(x).ndim == 1
    y = pts
    for _ in range(depth):
        y = f.eval_inv(y)
    out = y * (0.5 ** depth)
    return out[0] if single else out


@dataclass
class DisplacementField:
    """Grid-sampled u = h - id together with the reported conjugacy defect."""

    nodes: np.ndarray      # (N, d) grid nodes
    values: np.ndarray     # (N, d) displacement u at each node
    resolution: float      # grid spacing
    residual: float        # sup-norm conjugacy defect reported by the builder
    depth: int             # iteration sweeps (torus) or shadowing depth (plane)

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=1)))

    def to_csv(self) -> str:
        d = self.nodes.shape[1]
        header = ",".join([f"x{i+1}" for i in range(d)] + [f"u{i+1}" for i in range(d)])
        lines = [header]
        for node, val in zip(self.nodes, self.values):
            lines.append(",".join(f"{v:.17g}" for v in tuple(node) + tuple(val)))
        return "\n".join(lines) + "\n"

    def sidecar(self) -> str:
        return json.dumps(
            {"resolution": self.resolution, "residual": self.residual, "depth": self.depth},
            sort_keys=True,
        )


def conjugacy_residual(h_samples: DisplacementField, f: PlaneMapHandle,
                       max_skip_fraction: float = 0.10) -> float:
    """sup over nodes of |d2(x + u(x)) - (f(x) + u(f(x)))|, nearest-node lookup.

    Nodes whose image f(x) falls outside the sampled domain are skipped and
    counted; more than max_skip_fraction skipped raises a coverage error.
    """
    nodes = h_samples.nodes
    u = h_samples.values
    fx = f.eval(nodes)
    lo = nodes.min(axis=0)
    hi = nodes.max(axis=0)
    inside = np.all((fx >= lo - 1e-12) & (fx <= hi + 1e-12), axis=1)
    skipped = int(np.sum(~inside))
    if skipped > max_skip_fraction * len(nodes):
        raise ValueError(
            f"{skipped}/{len(nodes)} image points fall outside the sampled domain"
        )
    # nearest-node lookup on the regular grid
    span = hi - lo
    shape = np.round(span / h_samples.resolution).astype(int) + 1
    idx = np.clip(np.round((fx[inside] - lo) / h_samples.resolution), 0,
                  shape - 1).astype(int)
    flat = idx[:, 0] * shape[1] + idx[:, 1] if nodes.shape[1] == 2 else idx[:, 0]
    u_at_fx = u[flat]
    lhs = d2(nodes[inside] + u[inside])
    rhs = fx[inside] + u_at_fx
    return float(np.max(np.linalg.norm(lhs - rhs, axis=1)))


def grid_displacement_from_shadowing(f: PlaneMapHandle, lo, hi, spacing: float,
                                     depth: int) -> DisplacementField:
    """Sample u = h_depth - id on a regular grid over [lo, hi]^2."""
    xs = np.arange(lo[0], hi[0] + spacing / 2, spacing)
    ys = np.arange(lo[1], hi[1] + spacing / 2, spacing)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.stack([gx.ravel(), gy.ravel()], axis=1)
    h = shadow_plane(f, nodes, depth)
    resid_bound = 2.0 * f.c0_distance_to_d2 * 0.5 ** depth
    return DisplacementField(nodes=nodes, values=h - nodes, resolution=spacing,
                             residual=resid_bound, depth=depth)


# ---------------------------------------------------------------------------
# Torus semiconjugacy onto the linear model
# ---------------------------------------------------------------------------


def _torus_grid(n: int, d: int) -> np.ndarray:
    axes = [np.arange(n) / n for _ in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _nearest_node_index(pts: np.ndarray, n: int) -> np.ndarray:
    d = pts.shape[1]
    idx = np.mod(np.round(pts * n).astype(int), n)
    flat = idx[:, 0]
    for j in range(1, d):
        flat = flat * n + idx[:, j]
    return flat


def quasi_newton_inverse(f_lift: Callable[[Points], Points], L: ToralAutomorphism,
                         targets: Points, tol: float = 1e-13,
                         max_iter: int = 200) -> Points:
    """Solve f_lift(y) = x per row by the fixed-slope iteration y <- y - L^{-1}(f(y) - x)."""
    linv = np.linalg.inv(L.matrix)
    y = targets @ linv.T
    for _ in range(max_iter):
        delta = (f_lift(y) - targets) @ linv.T
        y = y - delta
        scale = 1.0 + float(np.max(np.abs(y)))
        if np.max(np.abs(delta)) < tol * scale:
            return y
    raise RuntimeError("lift inversion did not converge; supply f_lift_inv explicitly")


def torus_semiconjugacy(
    f_lift: Callable[[Points], Points],
    L: ToralAutomorphism,
    split: SpectrumSplit,
    grid: int,
    tol: float,
    f_lift_inv: Optional[Callable[[Points], Points]] = None,
    max_iter: int = 2000,
) -> DisplacementField:
    """Displacement u with (id + u) o f_bar = L o (id + u) up to residual <= tol.

    The unique bounded fixed point is reached by sweeping the contracting
    operator split along the spectral projections: the unstable component is
    summed backward through L^{-1}, the stable component forward through L.
    u is Z^d-periodic by construction (stored on the fundamental-domain grid
    with wrapped nearest-node lookups).
    """
    if not is_hyperbolic(L):
        raise NonHyperbolicError("torus semiconjugacy requires hyperbolic L")
    d = L.dim
    a = L.matrix
    a_inv = np.linalg.inv(a)
    nodes = _torus_grid(grid, d)
    g = f_lift(nodes) - nodes @ a.T                      # displacement of the lift
    if not np.all(np.isfinite(g)):
        raise ValueError("f_lift produced non-finite values")
    fwd_idx = _nearest_node_index(f_lift(nodes), grid)
    if f_lift_inv is not None:
        back = f_lift_inv(nodes)
    else:
        back = quasi_newton_inverse(f_lift, L, nodes)
    back_idx = _nearest_node_index(back, grid)
    g_back = g[back_idx]

    pu = split.unstable_proj
    ps = split.stable_proj
    lam_u_min = min(abs(v) for v in split.unstable_values)
    lam_s_max = max(abs(v) for v in split.stable_values)
    rho = max(1.0 / lam_u_min, lam_s_max)
    stop = tol * (1.0 - rho)

    u = np.zeros_like(nodes)
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        uu = (u[fwd_idx] + g) @ pu.T @ a_inv.T
        us = (u[back_idx] @ a.T - g_back) @ ps.T
        new = uu + us
        change = float(np.max(np.abs(new - u)))
        u = new
        if change < stop:
            break
    else:
        resid = _torus_residual(u, g, fwd_idx, a)
        raise RuntimeError(
            f"fixed-point iteration did not converge; last residual {resid:.3e}"
        )
    resid = _torus_residual(u, g, fwd_idx, a)
    return DisplacementField(nodes=nodes, values=u, resolution=1.0 / grid,
                             residual=resid, depth=sweeps)


def _torus_residual(u, g, fwd_idx, a) -> float:
    defect = g + u[fwd_idx] - u @ a.T
    return float(np.max(np.linalg.norm(defect, axis=1)))


def shadowing_constant(split: SpectrumSplit, k: float) -> float:
    """Classical bound C = k (||Ps|| / (1 - |lam_s|) + ||Pu|| / (lam_u - 1))."""
    lam_u_min = min(abs(v) for v in split.unstable_values)
    lam_s_max = max(abs(v) for v in split.stable_values)
    norm_ps = float(np.linalg.norm(split.stable_proj, 2))
    norm_pu = float(np.linalg.norm(split.unstable_proj, 2))
    return k * (norm_ps / (1.0 - lam_s_max) + norm_pu / (lam_u_min - 1.0))


def fiber_diameter_bound(
    f_lift: Callable[[Points], Points],
    L: ToralAutomorphism,
    x,
    depth: int,
    radius: float = 0.05,
    samples_per_axis: int = 21,
    budget: int = 20000,
    f_lift_inv: Optional[Callable[[Points], Points]] = None,
) -> float:
    """Diameter of the sampled points near x whose lifted orbits shadow x's orbit.

    A point y survives when max_{|k| <= depth} |f_bar^k(y) - f_bar^k(x)| stays
    within the classical shadowing constant of x's orbit; the diameter of the
    surviving cloud bounds the local h-fiber at sample resolution.
    """
    if not is_hyperbolic(L):
        raise NonHyperbolicError("fiber diameter bound requires hyperbolic L")
    x = np.asarray(x, dtype=float)
    d = L.dim
    if samples_per_axis ** d > budget:
        samples_per_axis = max(3, int(budget ** (1.0 / d)))
        warnings.warn("sampling budget exceeded; using a coarser partial grid")
    axes = [np.linspace(-radius, radius, samples_per_axis) for _ in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1) + x

    split = SpectrumSplit.of(L)
    probe = _torus_grid(32, d)
    k = float(np.max(np.linalg.norm(f_lift(probe) - probe @ L.matrix.T, axis=1)))
    const = shadowing_constant(split, max(k, 1e-9)) + 1e-9

    fwd = np.vstack([x[None, :], pts])
    alive = np.ones(len(pts), dtype=bool)
    for _ in range(depth):
        fwd = f_lift(fwd)
        dev = np.linalg.norm(fwd[1:] - fwd[0], axis=1)
        alive &= dev <= const
    if f_lift_inv is None:
        def f_lift_inv(z):
            return quasi_newton_inverse(f_lift, L, z)
    bwd = np.vstack([x[None, :], pts])
    for _ in range(depth):
        bwd = f_lift_inv(bwd)
        dev = np.linalg.norm(bwd[1:] - bwd[0], axis=1)
        alive &= dev <= const
    survivors = np.vstack([x[None, :], pts[alive]])
    diffs = survivors[:, None, :] - survivors[None, :, :]
    return float(np.max(np.linalg.norm(diffs, axis=2)))
