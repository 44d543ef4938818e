"""Sampled measurement systems and sparse coefficient recovery.

Recovery minimizes the l1 norm subject to an l2 residual ball (radius
zero for the equality-constrained variant) using a scaled ADMM splitting
with over-relaxation and residual-balancing penalty updates.  The solver
is deterministic: it always starts from zero, so reruns and rescaled
inputs reproduce the same coefficients to solver tolerance.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ConfigurationError, ContractError, RecoveryError
from .tensor import eval_rows, to_local_coords

_WEIGHT_FLOOR = 1e-6
_RIP_MAX_COLUMNS = 16
_RIP_MAX_ORDER = 4


@dataclass(frozen=True, eq=False)
class MeasurementSystem:
    """Sampled basis rows, observations, and optional diagonal weights."""

    matrix: np.ndarray
    rhs: np.ndarray
    sample_points: np.ndarray
    local_points: np.ndarray
    preconditioner: np.ndarray | None = None

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class RecoveryConfig:
    """Solver settings; epsilon is the per-sample residual level and is
    zero exactly in equality mode."""

    mode: str = "residual"
    epsilon: float = 1e-8
    solver_tol: float = 1e-9
    max_iter: int = 20000
    seedless: bool = True

    def __post_init__(self):
        if self.mode not in ("equality", "residual"):
            raise ConfigurationError(f"unknown recovery mode {self.mode!r}")
        if (self.epsilon == 0.0) != (self.mode == "equality"):
            raise ConfigurationError("epsilon must be zero exactly in equality mode")
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be >= 0")


def assemble(points, observations, idx, scaling, wavelets, part):
    """Measurement system whose rows are basis evaluations at the points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    obs = np.asarray(observations, dtype=float).ravel()
    if len(pts) != len(obs) or len(obs) < 1:
        raise ContractError("need equally many points and observations, at least one")
    local = np.atleast_2d(to_local_coords(part, pts))
    rows = eval_rows(idx, scaling, wavelets, part, pts)
    return MeasurementSystem(matrix=rows, rhs=obs.copy(), sample_points=pts, local_points=local)


def precondition(sys):
    """Scale rows by the product over dimensions of
    (pi/2)^(1/2) (1 - t^2)^(1/4) with t = 2*zeta - 1.

    Intended for systems sampled from the arcsine (Chebyshev) density;
    weights are floored to avoid annihilating rows when a sample lands
    numerically on a box face.
    """
    t = 2.0 * sys.local_points - 1.0
    factors = math.sqrt(math.pi / 2.0) * np.maximum(1.0 - t * t, 0.0) ** 0.25
    w = factors.prod(axis=1)
    clipped = w < _WEIGHT_FLOOR
    if np.any(clipped):
        warnings.warn(
            f"{int(clipped.sum())} preconditioner weight(s) clamped at {_WEIGHT_FLOOR}",
            RuntimeWarning,
        )
        w = np.maximum(w, _WEIGHT_FLOOR)
    return replace(
        sys,
        matrix=sys.matrix * w[:, None],
        rhs=sys.rhs * w,
        preconditioner=w,
    )


def _soft_threshold(v, k):
    return np.sign(v) * np.maximum(np.abs(v) - k, 0.0)


def _admm_l1(a, b, radius, tol, max_iter):
    """min ||x||_1  s.t.  ||a x - b||_2 <= radius, from the zero start.

    Returns (x, info).  The system is normalized internally so that the
    iteration is invariant under joint scaling of (a, b, radius).
    """
    ns, p = a.shape
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(p), {"iterations": 0, "primal": 0.0, "dual": 0.0, "converged": True}
    # Row-scale the constraint by 1/||b||: the feasible set and the solution
    # are unchanged, and the iteration becomes invariant under joint scaling
    # of (a, b, radius).
    scale = bnorm
    a = a / scale
    b = b / scale
    radius = radius / scale

    gram = np.eye(p) + a.T @ a
    factor = cho_factor(gram)
    rho = 1.0
    alpha = 1.7  # over-relaxation
    x = np.zeros(p)
    z = np.zeros(p)
    w = b.copy()
    uz = np.zeros(p)
    uw = np.zeros(ns)
    converged = False
    pri = dua = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        x = cho_solve(factor, (z - uz) + a.T @ (w - uw))
        ax = a @ x
        xh = alpha * x + (1.0 - alpha) * z
        axh = alpha * ax + (1.0 - alpha) * w
        z_old, w_old = z, w
        z = _soft_threshold(xh + uz, 1.0 / rho)
        v = axh + uw
        d = v - b
        dn = np.linalg.norm(d)
        w = b + (d * (radius / dn) if dn > radius else d)
        uz = uz + xh - z
        uw = uw + axh - w

        pri = math.sqrt(np.sum((x - z) ** 2) + np.sum((ax - w) ** 2))
        dua = rho * np.linalg.norm((z - z_old) + a.T @ (w - w_old))
        eps_pri = math.sqrt(p + ns) * 1e-14 + tol * max(
            math.sqrt(np.sum(x**2) + np.sum(ax**2)),
            math.sqrt(np.sum(z**2) + np.sum(w**2)),
        )
        eps_dua = math.sqrt(p) * 1e-14 + tol * rho * np.linalg.norm(uz + a.T @ uw)
        if pri <= eps_pri and dua <= eps_dua:
            converged = True
            break
        # residual balancing keeps the penalty in a useful range
        if it % 10 == 0:
            if pri > 10.0 * dua:
                rho *= 2.0
                uz /= 2.0
                uw /= 2.0
            elif dua > 10.0 * pri:
                rho /= 2.0
                uz *= 2.0
                uw *= 2.0
    info = {
        "iterations": it,
        "primal": float(pri),
        "dual": float(dua),
        "converged": converged,
        "residual": float(np.linalg.norm(a @ z - b)) * scale,
    }
    return z, info


def _solve(sys, radius, cfg):
    cfg = cfg or RecoveryConfig()
    a, b = np.asarray(sys.matrix, dtype=float), np.asarray(sys.rhs, dtype=float)
    if a.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ContractError("matrix/rhs shape mismatch")
    if not np.any(a):
        if np.any(b):
            raise RecoveryError("zero matrix with nonzero observations", residual=float(np.linalg.norm(b)))
        return np.zeros(a.shape[1])
    c, info = _admm_l1(a, b, radius, cfg.solver_tol, cfg.max_iter)
    if not info["converged"]:
        raise RecoveryError(
            f"l1 solver did not converge in {cfg.max_iter} iterations "
            f"(primal {info['primal']:.3e}, dual {info['dual']:.3e})",
            residual=info.get("residual"),
            iterations=info["iterations"],
        )
    return c


def solve_bp(sys, cfg=None):
    """Minimum-l1 coefficients matching the observations (to solver tolerance)."""
    return _solve(sys, 0.0, cfg)


def solve_bpdn(sys, epsilon, cfg=None):
    """Minimum-l1 coefficients with residual ball sqrt(n_s) * epsilon."""
    if epsilon < 0:
        raise ConfigurationError("epsilon must be >= 0")
    radius = math.sqrt(sys.matrix.shape[0]) * epsilon
    return _solve(sys, radius, cfg)


def rip_constant(a, s):
    """Smallest delta such that all s-column submatrices act as
    near-isometries, by exhaustive eigenvalue sweep."""
    a = np.asarray(a, dtype=float)
    p = a.shape[1]
    if p > _RIP_MAX_COLUMNS or s > _RIP_MAX_ORDER:
        raise ConfigurationError(
            f"exhaustive sweep limited to {_RIP_MAX_COLUMNS} columns and order {_RIP_MAX_ORDER}"
        )
    if not 1 <= s <= p:
        raise ConfigurationError(f"order must be in [1, {p}]")
    gram = a.T @ a
    delta = 0.0
    for cols in itertools.combinations(range(p), s):
        sub = gram[np.ix_(cols, cols)]
        ev = np.linalg.eigvalsh(sub)
        delta = max(delta, ev[-1] - 1.0, 1.0 - ev[0])
    return float(delta)


def sample_bound(s, m, k, delta, c_const):
    """Informational sample-count bound ceil(C/delta^2 * K^2 * s * ln(m)^4)."""
    if s < 1 or m < 2 or not 0 < delta < 1.0 + 1e-12 or k < 1:
        raise ConfigurationError("need s >= 1, m >= 2, 0 < delta <= 1, K >= 1")
    return math.ceil(c_const / delta**2 * k**2 * s * math.log(m) ** 4)


def chebyshev_points(n, rng):
    """n points on (-1,1) with the arcsine density."""
    return np.cos(math.pi * rng.uniform(0.0, 1.0, size=n))


def sampled_legendre_system(n_rows, n_cols, rng, preconditioned=True):
    """Rows of orthonormal Legendre values at random Chebyshev points,
    optionally scaled by the (pi/2)^(1/2) (1-x^2)^(1/4) weights.

    Returns (matrix, points); the standard test bed for recovery and
    near-isometry diagnostics.
    """
    from .mwbasis import legendre_orthonormal

    x = chebyshev_points(n_rows, rng)
    mat = np.stack([legendre_orthonormal(k, x) for k in range(n_cols)], axis=1)
    if preconditioned:
        w = math.sqrt(math.pi / 2.0) * (1.0 - x * x) ** 0.25
        mat = mat * w[:, None]
    return mat, x
