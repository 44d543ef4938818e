"""Orthonormal piecewise-polynomial bases on [0,1].

The scaling family is the rescaled orthonormal Legendre system; the
detail family consists of piecewise polynomials with one breakpoint at
1/2, unit norm, mutual orthogonality, and vanishing moments up to the
polynomial order.  Dilated/translated copies follow the usual
``2**(k/2) * B(2**k x - l)`` convention on dyadic subintervals.

Sign convention for the detail functions: the first non-vanishing
derivative at 0 (taken from the left piece) is positive.  For the
piecewise-constant case this makes the member equal +1 on [0, 1/2) and
-1 on [1/2, 1].  Members are ordered by alternating parity about 1/2,
ending with an odd member; within a parity class the order is the
deterministic Gram-Schmidt order of the generators |2x-1|^m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as nppoly

from .errors import ConfigurationError

MAX_ORDER = 12

# Gram-Schmidt rank-decision tolerance for the detail construction.
_RANK_TOL = 1e-9


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Polynomial pieces on subintervals of [0,1]; zero outside [0,1].

    ``pieces[i]`` holds ascending monomial coefficients in the local
    variable u = (x - a_i)/(b_i - a_i) of the interval
    [breakpoints[i], breakpoints[i+1]); the last interval is closed.
    The local variable keeps high-order coefficients well scaled.
    """

    breakpoints: tuple
    pieces: tuple
    degree: int

    def __post_init__(self):
        bp = self.breakpoints
        if len(bp) != len(self.pieces) + 1:
            raise ConfigurationError("breakpoint/piece count mismatch")
        if bp[0] != 0.0 or bp[-1] != 1.0 or any(a >= b for a, b in zip(bp, bp[1:])):
            raise ConfigurationError("breakpoints must increase strictly from 0 to 1")
        if any(len(c) > self.degree + 1 for c in self.pieces):
            raise ConfigurationError("piece degree exceeds declared degree")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xf = np.atleast_1d(x)
        out = np.zeros_like(xf)
        bp = np.asarray(self.breakpoints)
        idx = np.clip(np.searchsorted(bp, xf, side="right") - 1, 0, len(self.pieces) - 1)
        inside = (xf >= 0.0) & (xf <= 1.0)
        for i, coeffs in enumerate(self.pieces):
            sel = inside & (idx == i)
            if np.any(sel):
                a, b = bp[i], bp[i + 1]
                out[sel] = nppoly.polyval((xf[sel] - a) / (b - a), coeffs)
        return float(out[0]) if scalar else out.reshape(x.shape)

    def piece_degree(self, i):
        c = np.asarray(self.pieces[i])
        nz = np.nonzero(np.abs(c) > 0.0)[0]
        return int(nz[-1]) if nz.size else 0


@dataclass(frozen=True)
class ScalingBasis:
    order: int
    functions: tuple


@dataclass(frozen=True)
class WaveletBasis:
    order: int
    functions: tuple


@dataclass(frozen=True)
class DilationKey:
    """Identifies one dilate: kind in {scaling, wavelet}, member index,
    resolution level k >= 0 and shift l in [0, 2**k - 1]."""

    kind: str
    member: int
    level: int
    shift: int

    def __post_init__(self):
        if self.kind not in ("scaling", "wavelet"):
            raise ConfigurationError(f"unknown basis kind {self.kind!r}")
        if self.level < 0 or not 0 <= self.shift < 2 ** self.level:
            raise ConfigurationError("shift must satisfy 0 <= shift < 2**level")

    @property
    def support(self):
        w = 2.0 ** (-self.level)
        return (self.shift * w, (self.shift + 1) * w)


def _check_order(n0):
    if not isinstance(n0, (int, np.integer)) or not 0 <= n0 <= MAX_ORDER:
        raise ConfigurationError(f"polynomial order must be an integer in [0, {MAX_ORDER}], got {n0!r}")


def legendre_orthonormal(k, x):
    """Degree-k Legendre polynomial on [-1,1] with unit plain-L2 norm.

    Peaks at the endpoints with value sqrt(k + 1/2).
    """
    return math.sqrt(k + 0.5) * npleg.legval(x, [0.0] * k + [1.0])


def _scaling_coeffs(i):
    # sqrt(2i+1) * P_i(2x - 1) expanded in ascending monomials of x.
    p = nppoly.Polynomial(npleg.leg2poly([0.0] * i + [1.0]))
    shifted = p(nppoly.Polynomial([-1.0, 2.0]))
    return tuple(math.sqrt(2 * i + 1) * shifted.coef)


def build_scaling(n0):
    """Orthonormal polynomials of degree 0..n0 on [0,1] under the uniform weight."""
    _check_order(n0)
    funcs = tuple(
        PiecewisePolynomial((0.0, 1.0), (_scaling_coeffs(i),), degree=i) for i in range(n0 + 1)
    )
    return ScalingBasis(order=n0, functions=funcs)


def _gauss_unit(npts):
    # nodes/weights for integration over [0,1]
    t, w = npleg.leggauss(npts)
    return 0.5 * (t + 1.0), 0.5 * w


def _half_piece_coords(left_vals, right_vals, phi_vals, w):
    # coordinates of a function in the orthonormal half-interval system
    # hat(phi)_i^L = sqrt(2) Phi_i(2x) on [0,1/2), same with 2x-1 on the right.
    # <f, hat(phi)_i^L> = (1/sqrt 2) int_0^1 f(t/2) Phi_i(t) dt
    left = (left_vals[None, :] * phi_vals * w[None, :]).sum(axis=1) / math.sqrt(2.0)
    right = (right_vals[None, :] * phi_vals * w[None, :]).sum(axis=1) / math.sqrt(2.0)
    return np.concatenate([left, right])


def build_wavelets(n0):
    """Detail functions of order n0: unit norm, pairwise orthogonal, and
    orthogonal to every monomial of degree <= n0."""
    _check_order(n0)
    scaling = build_scaling(n0)
    m = n0 + 1
    nodes, w = _gauss_unit(n0 + 2)
    phi_vals = np.stack([f(nodes) for f in scaling.functions])  # (m, npts)

    # Coordinates of the monomials x^j in the half-interval system.
    mono = np.stack(
        [_half_piece_coords((nodes / 2.0) ** j, ((nodes + 1.0) / 2.0) ** j, phi_vals, w) for j in range(m)]
    )
    q_poly, _ = np.linalg.qr(mono.T)  # (2m, m), orthonormal span of the polynomials

    # Parity generators about 1/2: Phi_k(|2x-1|) and sign(2x-1)*Phi_k(|2x-1|).
    # The fold u = |2x-1| preserves the inner product, so each generator set
    # is itself orthonormal, which keeps the construction well conditioned up
    # to the maximum order.  Even-degree Phi_k contain only even powers, so
    # Phi_k(|2x-1|) is already a polynomial and contributes nothing to the
    # even class; same for odd degrees in the odd class.  With zeta = t/2 on
    # the left piece |2x-1| = 1-t, and zeta = (t+1)/2 on the right |2x-1| = t.
    even_gen, odd_gen = [], []
    for k in range(m):
        fold_left = scaling.functions[k](1.0 - nodes)
        fold_right = scaling.functions[k](nodes)
        if k % 2 == 1:
            even_gen.append(_half_piece_coords(fold_left, fold_right, phi_vals, w))
        else:
            odd_gen.append(_half_piece_coords(-fold_left, fold_right, phi_vals, w))

    def complement_basis(gens):
        kept = []
        for v in gens:
            r = v - q_poly @ (q_poly.T @ v)
            for u in kept:
                r -= (u @ r) * u
            # second pass keeps orthogonality tight at high order
            r -= q_poly @ (q_poly.T @ r)
            for u in kept:
                r -= (u @ r) * u
            nrm = np.linalg.norm(r)
            if nrm > _RANK_TOL:
                kept.append(r / nrm)
        return kept

    even = complement_basis(even_gen)
    odd = complement_basis(odd_gen)
    if len(even) + len(odd) != m:
        raise ConfigurationError(f"detail construction failed for order {n0}")

    # Interleave by alternating parity, ending with an odd member.
    ordered = []
    ei = oi = 0
    for i in range(m):
        if (n0 + 1 + i) % 2 == 0:  # even-parity slot
            ordered.append(even[ei])
            ei += 1
        else:
            ordered.append(odd[oi])
            oi += 1

    # Back to monomial pieces.  In the local variable u of either half the
    # piece is simply sum_i c_i sqrt(2) Phi_i(u), so no dilation or shift of
    # the coefficients is needed.
    phi_mono = np.zeros((m, m))
    for i in range(m):
        c = _scaling_coeffs(i)
        phi_mono[i, : len(c)] = c
    local_map = math.sqrt(2.0) * phi_mono
    funcs = []
    for vec in ordered:
        left = vec[:m] @ local_map
        right = vec[m:] @ local_map
        # sign: first non-vanishing derivative at 0+ positive
        lead = np.nonzero(np.abs(left) > 1e-9 * max(1.0, np.abs(left).max()))[0]
        if lead.size and left[lead[0]] < 0:
            left, right = -left, -right
        funcs.append(PiecewisePolynomial((0.0, 0.5, 1.0), (tuple(left), tuple(right)), degree=n0))
    return WaveletBasis(order=n0, functions=tuple(funcs))


def inner_product(f, g):
    """Integral of f*g over [0,1], exact Gauss rule per merged subinterval."""
    breaks = np.unique(np.concatenate([f.breakpoints, g.breakpoints]))
    npts = (f.degree + g.degree) // 2 + 1
    t, w = npleg.leggauss(npts)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        x = 0.5 * (b - a) * t + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.sum(w * f(x) * g(x))
    return float(total)


def eval_dilated(basis, key, x):
    """Evaluate ``2**(k/2) B(2**k x - l)``; zero off the dyadic support."""
    funcs = basis.functions
    if key.kind == "scaling" and not isinstance(basis, ScalingBasis):
        raise ConfigurationError("scaling key applied to a non-scaling basis")
    if key.kind == "wavelet" and not isinstance(basis, WaveletBasis):
        raise ConfigurationError("wavelet key applied to a non-wavelet basis")
    if not 0 <= key.member < len(funcs):
        raise ConfigurationError(f"member {key.member} outside basis of order {len(funcs) - 1}")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    y = 2.0**key.level * np.atleast_1d(x) - key.shift
    vals = np.where((y >= 0.0) & (y <= 1.0), 2.0 ** (key.level / 2.0) * funcs[key.member](y), 0.0)
    return float(vals[0]) if scalar else vals.reshape(x.shape)


@dataclass(frozen=True)
class UniformBoundReport:
    """Sup-norm bound used in sample-count formulas plus measured sups."""

    k: float
    sup_scaling: float
    sup_wavelet: float
    grid_points: int


def uniform_bound(n0, n, grid_points=100_000):
    """Bound K = 2**(n/2) for the n-dimensional tensor system, with the
    empirically measured 1D sups of the order-n0 families as diagnostics."""
    _check_order(n0)
    if n < 1:
        raise ConfigurationError("dimension must be >= 1")
    grid = np.linspace(0.0, 1.0, grid_points)
    scaling = build_scaling(n0)
    wavelets = build_wavelets(n0)
    sup_phi = max(float(np.abs(f(grid)).max()) for f in scaling.functions)
    sup_psi = max(float(np.abs(f(grid)).max()) for f in wavelets.functions)
    return UniformBoundReport(
        k=2.0 ** (n / 2.0), sup_scaling=sup_phi, sup_wavelet=sup_psi, grid_points=grid_points
    )


def dump_basis(scaling, wavelets):
    """Plain-text serialization used by golden-file tests.

    One ``scaling i``/``wavelet i`` header per function followed by a
    ``breaks`` line and one ``piece`` line per subinterval holding the
    ascending monomial coefficients in the interval-local variable;
    floats are written with full repr precision.
    """
    lines = [f"order {scaling.order}"]
    for tag, basis in (("scaling", scaling), ("wavelet", wavelets)):
        for i, f in enumerate(basis.functions):
            lines.append(f"{tag} {i}")
            lines.append("breaks " + " ".join(repr(float(b)) for b in f.breakpoints))
            for coeffs in f.pieces:
                lines.append("piece " + " ".join(repr(float(c)) for c in coeffs))
    return "\n".join(lines) + "\n"
