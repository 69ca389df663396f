"""Concrete trapped systems used throughout the test and acceptance suites.

Built-ins: the linear cat map with stable-segment plaques, a bump-perturbed
cat map with graph-transform plaques, and (in trapdyn.plane) the explicit
plane diffeomorphism viewed through disk plaques.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

from trapdyn.graphtransform import StableCurve, stable_curve
from trapdyn.linalg import CAT_MAP, ToralAutomorphism
from trapdyn.trapped import Plaque, TrappedSystem

LAMBDA_U = float((3 + np.sqrt(5)) / 2)
LAMBDA_S = float((3 - np.sqrt(5)) / 2)


def cat_directions() -> Tuple[np.ndarray, np.ndarray]:
    """Unit stable and unstable eigenvectors of the cat map."""
    a = CAT_MAP.matrix
    w, v = np.linalg.eig(a)
    i_u = int(np.argmax(np.abs(w)))
    i_s = 1 - i_u
    vs = np.real(v[:, i_s])
    vu = np.real(v[:, i_u])
    return vs / np.linalg.norm(vs), vu / np.linalg.norm(vu)


def _segment_plaque(x: np.ndarray, v: np.ndarray, r: float, samples: int) -> Plaque:
    t = np.linspace(-1.0, 1.0, samples)
    pts = np.mod(x[None, :] + (r * t)[:, None] * v[None, :], 1.0)
    return Plaque(points=pts, center_index=samples // 2)


def cat_system(r: float = 0.2, plaque_samples: int = 201) -> TrappedSystem:
    """The linear cat map with stable segments of half-length r as plaques."""
    a = CAT_MAP.matrix
    a_inv = np.linalg.inv(a)
    vs, vu = cat_directions()

    return TrappedSystem(
        eval=lambda p: np.mod(p @ a.T, 1.0),
        eval_inv=lambda p: np.mod(p @ a_inv.T, 1.0),
        plaque=lambda x: _segment_plaque(np.asarray(x, dtype=float), vs, r, plaque_samples),
        unstable_dir=lambda p: np.broadcast_to(vu, (len(p), 2)).copy(),
        ph_window=1,
        torus=True,
        name="cat",
    )


# ---------------------------------------------------------------------------
# Perturbed cat map  f(x) = A x + eps * psi(x) * v_s  (mod 1)
# ---------------------------------------------------------------------------


def _bump(s: np.ndarray) -> np.ndarray:
    """C-infinity bump: exp(1 - 1/(1-s^2)) on |s|<1, else 0; value 1 at 0."""
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


def _bump_grad_factor(s: np.ndarray) -> np.ndarray:
    """d/ds of the bump divided by s, kept finite at 0."""
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    b = np.exp(1.0 - 1.0 / (1.0 - si * si))
    out[inside] = b * (-2.0 / (1.0 - si * si) ** 2)
    return out


@dataclass(frozen=True)
class PerturbedCat:
    """Smooth bump perturbation of the cat map along the stable eigenvector."""

    eps: float = 0.05
    rho: float = 0.35
    center: Tuple[float, float] = (0.5, 0.5)

    def psi(self, p: np.ndarray) -> np.ndarray:
        rel = (p - np.asarray(self.center) + 0.5) % 1.0 - 0.5
        return _bump(np.linalg.norm(rel, axis=1) / self.rho)

    def grad_psi(self, p: np.ndarray) -> np.ndarray:
        rel = (p - np.asarray(self.center) + 0.5) % 1.0 - 0.5
        s = np.linalg.norm(rel, axis=1) / self.rho
        fac = _bump_grad_factor(s) / (self.rho * self.rho)
        return rel * fac[:, None]

    def eval(self, p: np.ndarray) -> np.ndarray:
        a = CAT_MAP.matrix
        vs, _ = cat_directions()
        return np.mod(p @ a.T + self.eps * self.psi(p)[:, None] * vs[None, :], 1.0)

    def eval_lift(self, p: np.ndarray) -> np.ndarray:
        """Lift to R^2: commutes with integer translations through A."""
        a = CAT_MAP.matrix
        vs, _ = cat_directions()
        return p @ a.T + self.eps * self.psi(np.mod(p, 1.0))[:, None] * vs[None, :]

    def jacobian(self, p: np.ndarray) -> np.ndarray:
        a = CAT_MAP.matrix
        vs, _ = cat_directions()
        g = self.grad_psi(p)
        return a[None, :, :] + self.eps * vs[None, :, None] * g[:, None, :]

    def eval_inv(self, q: np.ndarray) -> np.ndarray:
        """Newton inversion with the exact Jacobian (quadratic convergence)."""
        a_inv = np.linalg.inv(CAT_MAP.matrix)
        y = np.mod(q @ a_inv.T, 1.0)
        target = q
        for _ in range(50):
            fy = self.eval(y)
            resid = (fy - target + 0.5) % 1.0 - 0.5
            if np.max(np.abs(resid)) < 1e-13:
                break
            jac = self.jacobian(y)
            delta = np.linalg.solve(jac, resid[:, :, None])[:, :, 0]
            y = np.mod(y - delta, 1.0)
        return y

    def lift_inv(self, q: np.ndarray) -> np.ndarray:
        """Exact inverse of the lift on R^2 (no modding)."""
        a_inv = np.linalg.inv(CAT_MAP.matrix)
        y = q @ a_inv.T
        for _ in range(50):
            resid = self.eval_lift(y) - q
            scale = 1.0 + np.max(np.abs(y))
            if np.max(np.abs(resid)) < 1e-13 * scale:
                break
            jac = self.jacobian(np.mod(y, 1.0))
            delta = np.linalg.solve(jac, resid[:, :, None])[:, :, 0]
            y = y - delta
        return y


@lru_cache(maxsize=100000)
def _cached_curve(key, eps, rho, iterations, half_len, samples) -> StableCurve:
    pc = PerturbedCat(eps=eps, rho=rho)
    vs, vu = cat_directions()
    x = np.array(key, dtype=float)
    return stable_curve(pc.eval_lift, pc.lift_inv, x, vs, vu, iterations,
                        half_len=half_len, samples=samples, tol=1e-7)


def perturbed_cat_system(eps: float = 0.05, rho: float = 0.35, r: float = 0.2,
                         plaque_samples: int = 129, gt_iterations: int = 18,
                         power_steps: int = 14) -> TrappedSystem:
    """Perturbed cat map with plaques from the graph transform.

    The unstable direction field is computed by pushing the linear unstable
    vector along backward orbits (power iteration through Df).
    """
    pc = PerturbedCat(eps=eps, rho=rho)
    vs, vu = cat_directions()

    def unstable_dir(p: np.ndarray) -> np.ndarray:
        orbit = [np.mod(p, 1.0)]
        for _ in range(power_steps):
            orbit.append(pc.eval_inv(orbit[-1]))
        v = np.broadcast_to(vu, (len(p), 2)).copy()
        for k in range(power_steps, 0, -1):
            jac = pc.jacobian(orbit[k])
            v = np.einsum("nij,nj->ni", jac, v)
            v = v / np.linalg.norm(v, axis=1, keepdims=True)
        return v

    def plaque(x) -> Plaque:
        x = np.asarray(x, dtype=float)
        key = (round(float(x[0]), 12), round(float(x[1]), 12))
        curve = _cached_curve(key, eps, rho, gt_iterations, r, plaque_samples)
        pts = np.mod(curve.points(), 1.0)
        return Plaque(points=pts, center_index=plaque_samples // 2)

    return TrappedSystem(
        eval=pc.eval,
        eval_inv=pc.eval_inv,
        plaque=plaque,
        unstable_dir=unstable_dir,
        ph_window=2,
        torus=True,
        name=f"perturbed-cat(eps={eps})",
    )
