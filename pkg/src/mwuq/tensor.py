"""Mixed scaling+detail tensor basis on a box, index bookkeeping, and
statistics extracted from expansion coefficients.

The local basis on a leaf consists of products of scaling functions over
all directions (multi-indices of total degree <= n0) plus one univariate
detail member per direction and order.  All functions are evaluated in
the leaf-local coordinates, where they are orthonormal under the uniform
probability measure of the leaf, so means and variances are plain
Parseval sums of coefficients.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError, PartitionIntegrityError

_CONTAINS_SLACK = 1e-12


def scaling_multi_indices(n0, n):
    """All n-tuples of non-negative integers with total degree <= n0,
    graded-lexicographic, zero tuple first."""
    out = []
    for total in range(n0 + 1):
        for iota in itertools.product(range(total + 1), repeat=n):
            if sum(iota) == total:
                out.append(iota)
    return out


@dataclass(frozen=True)
class IndexSet:
    """Ordered enumeration of the mixed basis: scaling multi-indices first
    (graded-lex), then detail pairs (direction, member) by direction."""

    n0: int
    n: int
    scaling_part: tuple
    detail_part: tuple

    @property
    def size(self):
        return len(self.scaling_part) + len(self.detail_part)

    def labels(self):
        lab = ["S:" + "-".join(str(k) for k in iota) for iota in self.scaling_part]
        lab += [f"D:{j}-{i}" for j, i in self.detail_part]
        return lab


def enumerate_indices(n0, n):
    if n < 1:
        raise ContractError("dimension must be >= 1")
    scal = tuple(scaling_multi_indices(n0, n))
    detail = tuple((j, i) for j in range(n) for i in range(n0 + 1))
    expected = math.comb(n + n0, n) + n * (n0 + 1)
    idx = IndexSet(n0=n0, n=n, scaling_part=scal, detail_part=detail)
    assert idx.size == expected
    return idx


# --- dyadic index bookkeeping -------------------------------------------------
#
# A positive integer I encodes level k and translation l through
# I = 2**(k-1) + l - 1 with 1 <= l <= 2**(k-1); the associated interval of
# the unit frame is [2**-(k-1) * (l-1), 2**-(k-1) * l].


def index_level(i):
    if i < 1:
        raise ContractError("dyadic index must be >= 1")
    return i.bit_length()


def index_translation(i):
    return i - 2 ** (index_level(i) - 1) + 1


def index_interval(i):
    k, l = index_level(i), index_translation(i)
    w = 2.0 ** (-(k - 1))
    return ((l - 1) * w, l * w)


def child_indices(i):
    """Dyadic indices of the two halves of interval(i), lower first."""
    k, l = index_level(i), index_translation(i)
    base = 2**k
    return base + 2 * l - 2, base + 2 * l - 1


@dataclass(frozen=True)
class SubPartition:
    """Axis-aligned box of the random-parameter space.

    ``depth`` counts bisections from the root, so the box occupies a
    fraction 2**-depth of the root volume.  ``dyadic`` optionally holds
    one dyadic interval index per direction (root = all ones).
    """

    bounds: tuple
    depth: int = 0
    dyadic: tuple | None = None

    def __post_init__(self):
        if any(a >= b for a, b in self.bounds):
            raise ContractError(f"degenerate bounds {self.bounds}")
        if self.dyadic is not None and len(self.dyadic) != len(self.bounds):
            raise ContractError("dyadic index dimension mismatch")

    @property
    def dimension(self):
        return len(self.bounds)

    @property
    def volume(self):
        v = 1.0
        for a, b in self.bounds:
            v *= b - a
        return v

    @property
    def volume_fraction(self):
        return 2.0 ** (-self.depth)

    def contains(self, x, slack=_CONTAINS_SLACK):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ok = np.ones(len(x), dtype=bool)
        for j, (a, b) in enumerate(self.bounds):
            pad = slack * max(1.0, abs(a), abs(b))
            ok &= (x[:, j] >= a - pad) & (x[:, j] <= b + pad)
        return ok if ok.size > 1 else bool(ok[0])


def to_local_coords(part, x):
    """Map points in the box to [0,1]^n componentwise.

    Accepts one point of shape (n,) or a batch of shape (N, n); raises
    DomainError naming the first offending dimension.
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    pts = np.atleast_2d(arr)
    if pts.shape[1] != part.dimension:
        raise ContractError(f"point dimension {pts.shape[1]} != box dimension {part.dimension}")
    out = np.empty_like(pts)
    for j, (a, b) in enumerate(part.bounds):
        pad = _CONTAINS_SLACK * max(1.0, abs(a), abs(b))
        col = pts[:, j]
        if np.any((col < a - pad) | (col > b + pad)):
            bad = col[(col < a - pad) | (col > b + pad)][0]
            raise DomainError(f"coordinate {bad!r} outside [{a}, {b}] in dimension {j}")
        out[:, j] = np.clip((col - a) / (b - a), 0.0, 1.0)
    return out[0] if single else out


def eval_rows(idx, scaling, wavelets, part, x):
    """Basis-row matrix at one or many points of the leaf.

    Row entries follow the IndexSet order: products of scaling functions
    for each multi-index, then the detail member i in direction j.
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    local = np.atleast_2d(to_local_coords(part, arr))
    npts = local.shape[0]
    phi = np.stack([f(local) for f in scaling.functions])  # (n0+1, npts, n)
    rows = np.empty((npts, idx.size))
    for col, iota in enumerate(idx.scaling_part):
        v = np.ones(npts)
        for j, ij in enumerate(iota):
            if ij:
                v = v * phi[ij, :, j]
        rows[:, col] = v
    base = len(idx.scaling_part)
    for col, (j, i) in enumerate(idx.detail_part):
        rows[:, base + col] = wavelets.functions[i](local[:, j])
    return rows[0] if single else rows


def eval_row(idx, scaling, wavelets, part, x):
    return eval_rows(idx, scaling, wavelets, part, x)


def _check_length(coeffs, idx):
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (idx.size,):
        raise ContractError(f"expected {idx.size} coefficients, got shape {c.shape}")
    return c


def local_mean(coeffs, idx):
    """Mean of the expansion: the coefficient of the zero multi-index."""
    return float(_check_length(coeffs, idx)[0])


def local_variance(coeffs, idx):
    """Variance and per-direction detail energies by Parseval."""
    c = _check_length(coeffs, idx)
    ns = len(idx.scaling_part)
    scaling_energy = float(np.sum(c[1:ns] ** 2))
    dir_var = np.zeros(idx.n)
    for col, (j, _) in enumerate(idx.detail_part):
        dir_var[j] += c[ns + col] ** 2
    return scaling_energy + float(dir_var.sum()), dir_var


@dataclass(frozen=True, eq=False)
class LeafSolution:
    """Recovered expansion on one leaf plus its summary statistics."""

    coefficients: np.ndarray
    mean: float
    variance: float
    dir_variance: np.ndarray
    samples_used: int


def aggregate_statistics(leaves):
    """Global mean/variance of a tiling under uniform inputs.

    Weights are volume fractions; the variance combines within-leaf
    variances and between-leaf mean spread (law of total variance).
    """
    if not leaves:
        raise ContractError("no leaves to aggregate")
    n = leaves[0][0].dimension
    lo = [min(p.bounds[j][0] for p, _ in leaves) for j in range(n)]
    hi = [max(p.bounds[j][1] for p, _ in leaves) for j in range(n)]
    total = math.prod(h - l for l, h in zip(lo, hi))
    vols = np.array([p.volume for p, _ in leaves])
    if abs(vols.sum() - total) > 1e-9 * max(1.0, total):
        raise PartitionIntegrityError(
            f"leaf volumes sum to {vols.sum()!r}, expected {total!r}"
        )
    w = vols / total
    means = np.array([s.mean for _, s in leaves])
    variances = np.array([s.variance for _, s in leaves])
    mean = float(w @ means)
    variance = float(w @ (means**2 + variances) - mean**2)
    return mean, max(variance, 0.0)


# --- line-oriented leaf records ----------------------------------------------
#
# One block per leaf:
#   leaf <n> <depth> <a1> <b1> ... <an> <bn>
#   dyadic <I1> ... <In>              (omitted when not tracked)
#   stat <mean> <variance> <sig2_1> ... <sig2_n>
#   labels <lab1> ... <labP>
#   coeffs <c1> ... <cP>
#   pt <x1> ... <xn>                  (one line per retained sample)
#   end


def format_leaf_record(part, sol, idx, samples=None):
    lines = [
        "leaf %d %d " % (part.dimension, part.depth)
        + " ".join(f"{a!r} {b!r}" for a, b in part.bounds)
    ]
    if part.dyadic is not None:
        lines.append("dyadic " + " ".join(str(i) for i in part.dyadic))
    stat = [sol.mean, sol.variance, *sol.dir_variance]
    lines.append("stat " + " ".join(repr(float(v)) for v in stat))
    lines.append("labels " + " ".join(idx.labels()))
    lines.append("coeffs " + " ".join(repr(float(c)) for c in sol.coefficients))
    if samples is not None:
        for pt in np.atleast_2d(samples):
            lines.append("pt " + " ".join(repr(float(v)) for v in pt))
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_leaf_records(text):
    """Inverse of format_leaf_record; returns (part, sol, samples) triples."""
    out = []
    cur = None
    for raw in text.splitlines():
        tokens = raw.split()
        if not tokens:
            continue
        tag, rest = tokens[0], tokens[1:]
        if tag == "leaf":
            n, depth = int(rest[0]), int(rest[1])
            vals = [float(v) for v in rest[2:]]
            bounds = tuple((vals[2 * j], vals[2 * j + 1]) for j in range(n))
            cur = {"bounds": bounds, "depth": depth, "dyadic": None, "samples": []}
        elif tag == "dyadic":
            cur["dyadic"] = tuple(int(v) for v in rest)
        elif tag == "stat":
            vals = [float(v) for v in rest]
            cur["mean"], cur["variance"], cur["dir"] = vals[0], vals[1], np.array(vals[2:])
        elif tag == "labels":
            cur["labels"] = rest
        elif tag == "coeffs":
            cur["coeffs"] = np.array([float(v) for v in rest])
        elif tag == "pt":
            cur["samples"].append([float(v) for v in rest])
        elif tag == "end":
            part = SubPartition(bounds=cur["bounds"], depth=cur["depth"], dyadic=cur["dyadic"])
            sol = LeafSolution(
                coefficients=cur["coeffs"],
                mean=cur["mean"],
                variance=cur["variance"],
                dir_variance=cur["dir"],
                samples_used=len(cur["samples"]),
            )
            samples = np.array(cur["samples"]) if cur["samples"] else None
            out.append((part, sol, samples))
            cur = None
        else:
            raise ContractError(f"unknown leaf-record tag {tag!r}")
    return out
