"""Validated linear-algebra types: observables, states, spin operators, lattices."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import TOL
from .errors import (
    DimMismatch,
    EigSolverFailure,
    ImaginaryResidue,
    InvalidSpin,
    NonFinite,
    NormalizationMismatch,
    NotHermitian,
    NotPSD,
    NotSquare,
    NotUnitTrace,
    ValidationError,
)

__all__ = [
    "Normalization",
    "HermitianOperator",
    "DensityMatrix",
    "OperatorTuple",
    "EigenLattice",
    "make_hermitian",
    "make_density",
    "maximally_mixed",
    "pure_state",
    "eigenstate",
    "spin_matrices",
    "spin_operator",
    "bloch_expectations",
    "eigen_lattice",
    "cluster_values",
]


class Normalization(str, enum.Enum):
    """Unit convention for spin operators.

    ``HBAR`` gives spectrum {-j, ..., j}; ``PAULI`` (spin-1/2 only) rescales
    to {-1, +1}.
    """

    HBAR = "hbar-units"
    PAULI = "pauli"


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


def _as_square(entries, dtype=complex):
    try:
        a = np.array(entries, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"cannot interpret entries as a matrix: {exc}") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NotSquare(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix has non-finite entries")
    return a


def _hermitian_defect(a):
    return float(np.max(np.abs(a - a.conj().T)))


def cluster_values(values, tol=TOL.lattice):
    """Sorted distinct representatives of ``values``.

    Values closer than ``tol`` (after sorting) collapse onto the first member
    of their run.
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        return v
    keep = np.ones(v.size, dtype=bool)
    anchor = v[0]
    for i in range(1, v.size):
        if v[i] - anchor <= tol:
            keep[i] = False
        else:
            anchor = v[i]
    return v[keep]


def _clean_eigenvalue(x):
    # strips ~1e-16 eigensolver noise so half-integer spectra stay exact
    return float(np.round(x, 12)) + 0.0


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A d x d Hermitian matrix with its eigendecomposition.

    Eigenvalues are sorted ascending; ``eigenvectors[:, k]`` belongs to
    ``eigenvalues[k]``. Within a degenerate cluster the basis is whatever the
    eigensolver returned; everything downstream goes through ``projectors``,
    which do not depend on that choice.
    """

    entries: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    levels: np.ndarray = field(repr=False)
    projectors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def lambda_min(self) -> float:
        return float(self.levels[0])

    @property
    def lambda_max(self) -> float:
        return float(self.levels[-1])

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def exp_i(self, t):
        """exp(i t A) for scalar ``t``, real or complex."""
        phases = np.exp(1j * complex(t) * self.eigenvalues)
        return (self.eigenvectors * phases) @ self.eigenvectors.conj().T

    def __matmul__(self, other):
        other = other.entries if isinstance(other, HermitianOperator) else other
        return self.entries @ other

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def make_hermitian(entries) -> HermitianOperator:
    a = _as_square(entries)
    defect = _hermitian_defect(a)
    if defect > TOL.hermitian:
        raise NotHermitian(f"max |A - A^dagger| = {defect:.3e} exceeds {TOL.hermitian:g}")
    try:
        w, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigSolverFailure(str(exc)) from exc
    recon = (u * w) @ u.conj().T
    if np.linalg.norm(recon - a) > TOL.reconstruction * max(1.0, np.linalg.norm(a)):
        raise EigSolverFailure("eigendecomposition does not reconstruct the input")
    if np.linalg.norm(u.conj().T @ u - np.eye(a.shape[0])) > TOL.unitarity:
        raise EigSolverFailure("eigenvector matrix is not unitary")

    levels = cluster_values([_clean_eigenvalue(x) for x in w])
    projectors = np.zeros((levels.size, a.shape[0], a.shape[0]), dtype=complex)
    for k, lam in enumerate(w):
        idx = int(np.argmin(np.abs(levels - lam)))
        projectors[idx] += np.outer(u[:, k], u[:, k].conj())
    return HermitianOperator(
        entries=_frozen(a),
        eigenvalues=_frozen(w),
        eigenvectors=_frozen(u),
        levels=_frozen(levels),
        projectors=_frozen(projectors),
    )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def expectation(self, op) -> complex:
        a = op.entries if isinstance(op, HermitianOperator) else np.asarray(op)
        return complex(np.trace(self.entries @ a))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def make_density(entries) -> DensityMatrix:
    rho = _as_square(entries)
    defect = _hermitian_defect(rho)
    if defect > TOL.hermitian:
        raise NotHermitian(f"max |rho - rho^dagger| = {defect:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TOL.trace:
        raise NotUnitTrace(f"trace(rho) = {tr.real:.15g}, expected 1")
    w = np.linalg.eigvalsh(rho)
    if w[0] < -TOL.psd:
        raise NotPSD(f"minimum eigenvalue {w[0]:.3e} is negative")
    return DensityMatrix(_frozen(rho))


def maximally_mixed(dim: int) -> DensityMatrix:
    return make_density(np.eye(dim) / dim)


def pure_state(vector) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0 or not np.isfinite(nrm):
        raise ValidationError("state vector must be finite and non-zero")
    v = v / nrm
    rho = np.outer(v, v.conj())
    # exact Hermitian symmetry; the outer product can be off by one ulp
    return make_density(0.5 * (rho + rho.conj().T))


def eigenstate(op: HermitianOperator, sign: int = +1) -> DensityMatrix:
    """Projector onto the top (``sign=+1``) or bottom (``sign=-1``) eigenvector."""
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    level = op.levels[-1] if sign > 0 else op.levels[0]
    k = -1 if sign > 0 else 0
    if np.count_nonzero(np.abs(op.eigenvalues - level) <= TOL.lattice) > 1:
        raise ValidationError("extreme eigenvalue is degenerate; eigenstate is not unique")
    return pure_state(op.eigenvectors[:, k])


@dataclass(frozen=True, eq=False)
class OperatorTuple:
    ops: tuple
    labels: tuple

    def __post_init__(self):
        if len(self.ops) < 1:
            raise ValidationError("an operator tuple needs at least one operator")
        dims = {op.dim for op in self.ops}
        if len(dims) != 1:
            raise DimMismatch(f"operators have different dimensions {sorted(dims)}")
        if len(self.labels) != len(self.ops):
            raise ValidationError("one label per operator is required")

    @classmethod
    def of(cls, *ops, labels: Sequence[str] | None = None) -> "OperatorTuple":
        ops = tuple(op if isinstance(op, HermitianOperator) else make_hermitian(op) for op in ops)
        if labels is None:
            labels = tuple(f"A{k + 1}" for k in range(len(ops)))
        return cls(ops, tuple(labels))

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def dim(self) -> int:
        return self.ops[0].dim

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, k):
        return self.ops[k]

    def permuted(self, order) -> "OperatorTuple":
        return OperatorTuple(tuple(self.ops[k] for k in order), tuple(self.labels[k] for k in order))

    def commute(self, tol: float = 1e-12) -> bool:
        for a, b in itertools.combinations(self.ops, 2):
            if np.linalg.norm(a.entries @ b.entries - b.entries @ a.entries) > tol:
                return False
        return True


def _check_spin(j) -> float:
    j = float(j)
    if not np.isfinite(j) or j <= 0 or abs(2 * j - round(2 * j)) > 1e-12:
        raise InvalidSpin(f"spin must be a positive half-integer, got {j}")
    return round(2 * j) / 2


def spin_matrices(j):
    """(Jx, Jy, Jz) in the Jz eigenbasis ordered m = j, j-1, ..., -j."""
    j = _check_spin(j)
    m = j - np.arange(int(round(2 * j)) + 1)
    jz = np.diag(m).astype(complex)
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)); basis index i has m = j - i
    coupling = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.diag(coupling, k=1).astype(complex)
    jm = jp.conj().T
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    return jx, jy, jz


def direction(theta, phi):
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def spin_operator(j, theta, phi, normalization=Normalization.HBAR) -> HermitianOperator:
    """Spin component S . n along n = (sin t cos p, sin t sin p, cos t)."""
    j = _check_spin(j)
    try:
        normalization = Normalization(normalization)
    except ValueError as exc:
        raise NormalizationMismatch(f"unknown normalization {normalization!r}") from exc
    if normalization is Normalization.PAULI and j != 0.5:
        raise NormalizationMismatch("pauli normalization is only defined for j = 1/2")
    nx, ny, nz = direction(theta, phi)
    jx, jy, jz = spin_matrices(j)
    s = nx * jx + ny * jy + nz * jz
    if normalization is Normalization.PAULI:
        s = 2 * s
    s = 0.5 * (s + s.conj().T)
    return make_hermitian(s)


def bloch_expectations(rho: DensityMatrix, ops) -> np.ndarray:
    """Real vector of expectations tr(rho A_k)."""
    ops = list(ops)
    if any(op.dim != rho.dim for op in ops):
        raise DimMismatch("state and operators have different dimensions")
    vals = np.array([rho.expectation(op) for op in ops])
    if vals.size and np.max(np.abs(vals.imag)) > TOL.hermitian:
        raise ImaginaryResidue("expectation of a Hermitian operator is not real")
    return vals.real.copy()


@dataclass(frozen=True, eq=False)
class EigenLattice:
    """Cartesian product of per-axis m-fold eigenvalue averages."""

    m: int
    per_axis_values: tuple

    @property
    def shape(self) -> tuple:
        return tuple(v.size for v in self.per_axis_values)

    def __len__(self):
        return int(np.prod(self.shape))

    @property
    def points(self) -> np.ndarray:
        grids = np.meshgrid(*self.per_axis_values, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def contains(self, point, tol: float = TOL.lattice) -> bool:
        return all(np.min(np.abs(v - x)) <= tol for v, x in zip(self.per_axis_values, point))


def minkowski_sums(levels, m: int, tol: float = TOL.lattice):
    """Distinct sums of ``t`` values from ``levels`` for t = 1..m.

    Returns a list ``sums`` with ``sums[t-1]`` the sorted distinct t-fold sums
    and a list ``steps`` where ``steps[t-1][a, i]`` is the index in
    ``sums[t]`` of ``sums[t-1][a] + levels[i]``.
    """
    levels = np.asarray(levels, dtype=float)
    sums = [levels.copy()]
    steps = []
    for t in range(2, m + 1):
        cand = sums[-1][:, None] + levels[None, :]
        nxt = cluster_values(cand, tol * t)
        idx = np.abs(cand[..., None] - nxt[None, None, :]).argmin(axis=-1)
        sums.append(nxt)
        steps.append(idx)
    return sums, steps


def eigen_lattice(ops: OperatorTuple, m: int) -> EigenLattice:
    m = int(m)
    if m < 1:
        raise ValidationError("order m must be a positive integer")
    axes = []
    for op in ops:
        sums, _ = minkowski_sums(op.levels, m)
        axes.append(_frozen(sums[-1] / m))
    return EigenLattice(m, tuple(axes))
