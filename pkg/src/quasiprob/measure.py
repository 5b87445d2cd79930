"""Margenau-Hill quasi-probability measures as exact finite signed measures.

The order-m measure is built without any Fourier inversion: for each
ordering pi of the observables, the one-step measure puts the matrix weight
P_pi(1) P_pi(2) ... P_pi(n) (spectral projectors) on the lattice point of the
corresponding eigenvalues divided by m.  Its m-fold convolution, traced
against rho and averaged over the n! orderings, is p_MH_m.

Convolutions run on a dense per-axis index lattice, so merging coincident
atoms never depends on floating point summation order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import TOL
from .errors import (
    AtomBudgetExceeded,
    AxisOutOfRange,
    DimMismatch,
    ImaginaryResidue,
    ValidationError,
)
from .operators import (
    DensityMatrix,
    HermitianOperator,
    OperatorTuple,
    cluster_values,
    minkowski_sums,
)

__all__ = [
    "SignedDiscreteMeasure",
    "MatrixAtomMeasure",
    "signed_measure",
    "one_step_measure",
    "convolve_power",
    "mh_measure",
    "marginal",
    "spectral_marginal",
    "measure_l1_distance",
]


def _merge_keys(points, tol):
    keys = np.round(np.asarray(points, dtype=float) / tol).astype(np.int64)
    uniq, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    return first, inverse.ravel(), len(uniq)


@dataclass(frozen=True, eq=False)
class SignedDiscreteMeasure:
    """Finite list of atoms in R^n with real (possibly negative) weights.

    Atoms are sorted lexicographically and no two lie within the merge
    tolerance of each other.  Build instances with :func:`signed_measure`.
    """

    points: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def ndim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.weights.shape[0]

    def __iter__(self):
        return zip(map(tuple, self.points), self.weights)

    def total_mass(self) -> float:
        return float(math.fsum(self.weights))

    def negative_mass(self) -> float:
        return float(-self.weights[self.weights < 0].sum())

    def moment(self, axis: int) -> float:
        return float(math.fsum(self.weights * self.points[:, axis]))

    def weight_at(self, point, tol: float = TOL.lattice) -> float:
        d = np.max(np.abs(self.points - np.asarray(point, dtype=float)), axis=1)
        hit = d <= tol
        return float(self.weights[hit].sum())

    def scaled(self, factor: float) -> "SignedDiscreteMeasure":
        return signed_measure(self.points, factor * self.weights, self.meta, keep_zero=True)


def signed_measure(points, weights, meta=None, *, keep_zero=False, tol=TOL.lattice) -> SignedDiscreteMeasure:
    """Canonicalize (sort, merge, optionally drop zeros) and wrap atoms."""
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float).ravel()
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] != weights.shape[0]:
        raise ValidationError("points and weights have different lengths")
    if points.shape[0] == 0:
        out_p = points.reshape(0, points.shape[1] if points.ndim == 2 else 1)
        out_w = weights
    else:
        first, inverse, count = _merge_keys(points, tol)
        out_w = np.bincount(inverse, weights=weights, minlength=count)
        out_p = points[first]
        if not keep_zero:
            keep = np.abs(out_w) >= TOL.zero_weight
            out_p, out_w = out_p[keep], out_w[keep]
    out_p = np.array(out_p)
    out_w = np.array(out_w)
    out_p.setflags(write=False)
    out_w.setflags(write=False)
    return SignedDiscreteMeasure(out_p, out_w, dict(meta or {}))


@dataclass(frozen=True, eq=False)
class MatrixAtomMeasure:
    """Atoms in R^n carrying d x d complex matrix weights."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def ndim(self) -> int:
        return self.points.shape[1]

    @property
    def dim(self) -> int:
        return self.weights.shape[-1]

    def __len__(self):
        return self.points.shape[0]

    def weight_at(self, point, tol: float = TOL.lattice) -> np.ndarray:
        d = np.max(np.abs(self.points - np.asarray(point, dtype=float)), axis=1)
        return self.weights[d <= tol].sum(axis=0)

    def trace_against(self, rho) -> np.ndarray:
        return np.einsum("ij,aji->a", np.asarray(rho), self.weights)


def _matrix_measure(points, weights, tol=TOL.lattice) -> MatrixAtomMeasure:
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=complex)
    first, inverse, count = _merge_keys(points, tol)
    merged = np.zeros((count,) + weights.shape[1:], dtype=complex)
    np.add.at(merged, inverse, weights)
    return MatrixAtomMeasure(points[first], merged)


# -- dense lattice engine -------------------------------------------------

def _dense_one_step(ops: OperatorTuple, perm) -> np.ndarray:
    """Matrix weights on the product of per-axis eigenvalue levels.

    Entry [i_1, ..., i_n] holds P^{perm(1)}_{i_perm(1)} ... P^{perm(n)}_{i_perm(n)};
    the axes stay in the original (unpermuted) order.
    """
    shape = tuple(op.levels.size for op in ops)
    d = ops.dim
    base = np.zeros(shape + (d, d), dtype=complex)
    projs = [np.asarray(op.projectors) for op in ops]
    for idx in itertools.product(*(range(c) for c in shape)):
        w = projs[perm[0]][idx[perm[0]]]
        for k in perm[1:]:
            w = w @ projs[k][idx[k]]
        base[idx] = w
    return base


def _dense_power(base: np.ndarray, steps, m: int) -> np.ndarray:
    """m-fold convolution of a dense matrix-weighted lattice measure.

    ``steps[k][t-2][a, i]`` maps (level-(t-1) index a, base index i) on axis
    k to the level-t index; see :func:`minkowski_sums`.  The accumulated
    weight is always the left factor.
    """
    n = base.ndim - 2
    acc = base
    nonzero = [idx for idx in np.ndindex(*base.shape[:n]) if np.any(base[idx] != 0)]
    for t in range(2, m + 1):
        shape = tuple(steps[k][t - 2].max() + 1 for k in range(n))
        new = np.zeros(shape + base.shape[-2:], dtype=complex)
        for b in nonzero:
            maps = [steps[k][t - 2][:, b[k]] for k in range(n)]
            target = np.ix_(*maps)
            contrib = acc @ base[b]
            if all(np.unique(mp).size == mp.size for mp in maps):
                new[target] += contrib
            else:
                np.add.at(new, target, contrib)
        acc = new
    return acc


def _axis_sums(levels_per_axis, m):
    sums, steps = [], []
    for levels in levels_per_axis:
        s, st = minkowski_sums(levels, m)
        sums.append(s[-1])
        steps.append(st)
    return sums, steps


def _check_budget(sizes, d, budget):
    atoms = int(np.prod([int(s) for s in sizes], dtype=object))
    if atoms > budget:
        raise AtomBudgetExceeded(f"{atoms} lattice atoms exceed the budget of {budget}")
    return atoms


def _lattice_points(axis_values):
    grids = np.meshgrid(*axis_values, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


# -- public operations ----------------------------------------------------

def one_step_measure(ops: OperatorTuple, m: int, perm=None) -> MatrixAtomMeasure:
    """Matrix-valued measure whose Fourier transform is prod_k exp(i xi_pi(k) A_pi(k) / m)."""
    n = ops.n
    perm = tuple(range(n)) if perm is None else tuple(perm)
    if sorted(perm) != list(range(n)):
        raise ValidationError(f"{perm} is not a permutation of 0..{n - 1}")
    base = _dense_one_step(ops, perm)
    pts = _lattice_points([np.asarray(op.levels) / m for op in ops])
    return MatrixAtomMeasure(pts, base.reshape((-1,) + base.shape[-2:]))


def convolve_power(base: MatrixAtomMeasure, m: int, budget: int = TOL.atom_budget) -> MatrixAtomMeasure:
    """m-fold convolution power; the matrix weight at x is the ordered sum of
    W_prev(y) W_base(z) over x = y + z."""
    m = int(m)
    if m < 1:
        raise ValidationError("m must be a positive integer")
    if m == 1:
        return base
    n = base.ndim
    levels = [cluster_values(base.points[:, k]) for k in range(n)]
    sums, steps = _axis_sums(levels, m)
    _check_budget([s.size for s in sums], base.dim, budget)
    shape = tuple(lv.size for lv in levels)
    dense = np.zeros(shape + (base.dim, base.dim), dtype=complex)
    for p, w in zip(base.points, base.weights):
        idx = tuple(int(np.argmin(np.abs(levels[k] - p[k]))) for k in range(n))
        dense[idx] += w
    out = _dense_power(dense, steps, m)
    return MatrixAtomMeasure(_lattice_points(sums), out.reshape((-1,) + out.shape[-2:]))


def mh_measure(
    ops: OperatorTuple,
    rho: DensityMatrix,
    m: int,
    *,
    keep_lattice: bool = False,
    budget: int = TOL.atom_budget,
) -> SignedDiscreteMeasure:
    """Order-m Margenau-Hill quasi-probability measure p_MH_m.

    With ``keep_lattice`` every point of the averaged eigenvalue lattice is
    reported, including atoms whose weight cancels to zero.
    """
    m = int(m)
    if m < 1:
        raise ValidationError("m must be a positive integer")
    if ops.n > TOL.max_observables:
        raise ValidationError(f"at most {TOL.max_observables} observables are supported")
    if rho.dim != ops.dim:
        raise DimMismatch(f"state has dim {rho.dim}, operators have dim {ops.dim}")

    sums, steps = _axis_sums([op.levels for op in ops], m)
    _check_budget([s.size for s in sums], ops.dim, budget)

    r = np.asarray(rho.entries)
    perms = list(itertools.permutations(range(ops.n)))
    total = None
    for perm in perms:
        dense = _dense_power(_dense_one_step(ops, perm), steps, m)
        tr = np.einsum("ij,...ji->...", r, dense)
        total = tr if total is None else total + tr
    # the n! sum is real; individual orderings are not
    total = total / len(perms)
    residue = float(np.max(np.abs(total.imag))) if total.size else 0.0
    if residue > TOL.imag_residue:
        raise ImaginaryResidue(f"imaginary residue {residue:.3e} in p_MH_{m}")

    points = _lattice_points([s / m for s in sums])
    meta = {
        "m": m,
        "labels": list(ops.labels),
        "imag_residue": residue,
        "keep_lattice": keep_lattice,
    }
    return signed_measure(points, total.real.ravel(), meta, keep_zero=keep_lattice)


def marginal(mu: SignedDiscreteMeasure, axis: int) -> SignedDiscreteMeasure:
    """Push ``mu`` forward onto coordinate ``axis`` (0-based)."""
    if not 0 <= axis < mu.ndim:
        raise AxisOutOfRange(f"axis {axis} out of range for a {mu.ndim}-dimensional measure")
    meta = dict(mu.meta, axis=axis)
    return signed_measure(mu.points[:, [axis]], mu.weights, meta, keep_zero=mu.meta.get("keep_lattice", False))


def spectral_marginal(rho: DensityMatrix, op: HermitianOperator) -> SignedDiscreteMeasure:
    """Born-rule law tr(rho P_lambda) on the distinct eigenvalues of ``op``."""
    if rho.dim != op.dim:
        raise DimMismatch("state and operator have different dimensions")
    probs = np.einsum("ij,aji->a", np.asarray(rho.entries), np.asarray(op.projectors))
    w = probs.real
    w = np.where(np.abs(w) < TOL.zero_weight, 0.0, w)
    return signed_measure(np.asarray(op.levels)[:, None], w)


def measure_l1_distance(a: SignedDiscreteMeasure, b: SignedDiscreteMeasure) -> float:
    """Sum of |w_a - w_b| after aligning atoms on the merge tolerance."""
    if a.ndim != b.ndim:
        raise DimMismatch(f"measures live in R^{a.ndim} and R^{b.ndim}")
    pts = np.concatenate([a.points, b.points])
    w = np.concatenate([a.weights, -b.weights])
    if pts.shape[0] == 0:
        return 0.0
    diff = signed_measure(pts, w, keep_zero=True)
    return float(math.fsum(np.abs(diff.weights)))
