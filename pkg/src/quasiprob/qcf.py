"""Wigner and Margenau-Hill quasi-characteristic functions.

Conventions: for a tuple (A_1..A_n) and state rho,

    f_W(z)     = tr(rho exp(i z.A))
    f_MH_m(z)  = 1/n! sum_pi tr(rho (prod_k exp(i z_pi(k) A_pi(k) / m))^m)

with the product taken left to right over k = 1..n.  Both extend to complex
arguments; the real-argument path uses eigendecompositions only.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import scipy.linalg

from .constants import TOL
from .errors import DimMismatch, EmptyGrid, NonFinite, ValidationError
from .operators import DensityMatrix, OperatorTuple

__all__ = [
    "QcfEvaluator",
    "f_w",
    "f_mh",
    "trotter_error_bound",
    "sup_qcf_distance",
    "supporting_function",
]


def _as_points(z, n, dtype=complex):
    z = np.asarray(z, dtype=dtype)
    single = z.ndim == 1
    z = np.atleast_2d(z)
    if z.shape[-1] != n:
        raise DimMismatch(f"expected {n}-dimensional arguments, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise NonFinite("argument has non-finite components")
    return z, single


class QcfEvaluator:
    """Evaluate f_W and f_MH_m for a fixed (operator tuple, state) pair."""

    def __init__(self, ops: OperatorTuple, rho: DensityMatrix):
        if ops.n > TOL.max_observables:
            raise ValidationError(
                f"n = {ops.n} observables; the n! permutation sum is capped at n <= {TOL.max_observables}"
            )
        if rho.dim != ops.dim:
            raise DimMismatch(f"state has dim {rho.dim}, operators have dim {ops.dim}")
        self.ops = ops
        self.rho = rho
        self.permutations = tuple(itertools.permutations(range(ops.n)))
        self._rho = np.asarray(rho.entries)
        self._mats = np.stack([np.asarray(op.entries) for op in ops])

    @property
    def n(self) -> int:
        return self.ops.n

    def _trace_rho(self, mats):
        return np.einsum("ij,...ji->...", self._rho, mats)

    def _exp_axis(self, k, t):
        """exp(i t A_k) for a 1-d array of (complex) scalars t."""
        op = self.ops[k]
        u = np.asarray(op.eigenvectors)
        lam = np.asarray(op.eigenvalues)
        phases = np.exp(1j * t[:, None] * lam[None, :])
        return np.einsum("ij,nj,kj->nik", u, phases, u.conj())

    def f_w_many(self, z) -> np.ndarray:
        z, _ = _as_points(z, self.n)
        out = np.empty(z.shape[0], dtype=complex)
        real = np.all(z.imag == 0, axis=1)
        if np.any(real):
            xi = z[real].real
            h = np.einsum("pk,kij->pij", xi, self._mats)
            w, u = np.linalg.eigh(h)
            # tr(rho U e^{iw} U^dag) = sum_j e^{i w_j} (U^dag rho U)_jj
            diag = np.einsum("pij,ik,pkj->pj", u.conj(), self._rho, u)
            out[real] = np.sum(diag * np.exp(1j * w), axis=1)
        for idx in np.flatnonzero(~real):
            gen = 1j * np.einsum("k,kij->ij", z[idx], self._mats)
            out[idx] = np.trace(self._rho @ scipy.linalg.expm(gen))
        return out

    def trotter_powers(self, m: int, z, perm) -> np.ndarray:
        """(prod_k exp(i z_perm(k) A_perm(k) / m))^m for each row of ``z``."""
        z, _ = _as_points(z, self.n)
        step = None
        for k in perm:
            e = self._exp_axis(k, z[:, k] / m)
            step = e if step is None else step @ e
        return np.linalg.matrix_power(step, m)

    def f_mh_many(self, m: int, z) -> np.ndarray:
        m = _check_order(m)
        z, _ = _as_points(z, self.n)
        total = np.zeros(z.shape[0], dtype=complex)
        for perm in self.permutations:
            total += self._trace_rho(self.trotter_powers(m, z, perm))
        return total / len(self.permutations)

    def f_w(self, z) -> complex:
        return complex(self.f_w_many(np.asarray(z, dtype=complex).reshape(1, -1))[0])

    def f_mh(self, m: int, z) -> complex:
        return complex(self.f_mh_many(m, np.asarray(z, dtype=complex).reshape(1, -1))[0])


def _check_order(m) -> int:
    if int(m) != m or m < 1:
        raise ValidationError(f"order m must be a positive integer, got {m!r}")
    return int(m)


def f_w(ev: QcfEvaluator, z) -> complex:
    return ev.f_w(z)


def f_mh(ev: QcfEvaluator, m: int, z) -> complex:
    return ev.f_mh(m, z)


def trotter_error_bound(ev: QcfEvaluator, xi, m: int) -> float:
    """Per-permutation Lie-Trotter estimate  ||rho||_F (2/m) exp(sum_k |xi_k| ||A_k||_F).

    Bounds |f_W(xi) - f_MH_m(xi)| for real ``xi``.
    """
    m = _check_order(m)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (ev.n,):
        raise DimMismatch(f"expected a {ev.n}-vector")
    norms = np.array([op.frobenius_norm() for op in ev.ops])
    return float(ev.rho.frobenius_norm() * (2.0 / m) * math.exp(float(np.abs(xi) @ norms)))


def sup_qcf_distance(ev: QcfEvaluator, m: int, grid) -> float:
    """max over ``grid`` of |f_W - f_MH_m|."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("grid has no points")
    grid = grid.reshape(-1, ev.n)
    return float(np.max(np.abs(ev.f_w_many(grid) - ev.f_mh_many(m, grid))))


def supporting_function(ops: OperatorTuple, y) -> float:
    """H_K(y) for K = conv(spectrum box), maximised over its 2^n vertices."""
    y = np.asarray(y, dtype=float)
    ends = [(op.lambda_min, op.lambda_max) for op in ops]
    return max(float(np.dot(v, y)) for v in itertools.product(*ends))
