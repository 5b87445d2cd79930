"""Regularized densities on 2-d grids.

Two smoothing windows are supported, both applied as a multiplier on the
quasi-characteristic function before inversion:

``gaussian``       exp(-eps |xi|^2); in space, convolution with
                   exp(-|u|^2 / (4 eps)) / (4 pi eps).  Used for figures.
``raised-cosine``  prod_k (1 + cos(pi xi_k / R)) / 2 on |xi_k| <= R, zero
                   outside.  Compactly supported in frequency, so smeared
                   p_MH_m converge uniformly to smeared p_W.

Discrete measures are smeared in closed form.  p_W has no atoms, so it is
obtained by direct quadrature of f_W times the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadGridSpec,
    DimMismatch,
    EmptyMeasure,
    ImaginaryResidue,
    QuadratureUnderresolved,
    ValidationError,
)
from .measure import SignedDiscreteMeasure
from .operators import DensityMatrix, HermitianOperator, OperatorTuple
from .qcf import QcfEvaluator

__all__ = [
    "GAUSSIAN",
    "RAISED_COSINE",
    "GridSpec",
    "DensityGrid",
    "ConvexPolygon",
    "smear_measure",
    "smear_kernel_1d",
    "regularized_density",
    "regularized_wigner",
    "regularized_mh",
    "measure_characteristic",
    "mass_outside_disk",
    "joint_numerical_range_2d",
    "convex_hull",
]

GAUSSIAN = "gaussian"
RAISED_COSINE = "raised-cosine"
KERNELS = (GAUSSIAN, RAISED_COSINE)

# exp(-eps R^2) below this is treated as zero
TRUNCATION = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform 2-d sampling grid: ``resolution[k]`` points spanning ``extent[k]``."""

    extent: tuple
    resolution: tuple

    def __post_init__(self):
        if len(self.extent) != 2 or len(self.resolution) != 2:
            raise BadGridSpec("only 2-d grids are supported")
        for (lo, hi), n in zip(self.extent, self.resolution):
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
                raise BadGridSpec(f"bad axis range [{lo}, {hi}]")
            if int(n) != n or n < 2:
                raise BadGridSpec(f"an axis needs at least 2 samples, got {n}")

    @classmethod
    def square(cls, half_width: float, n: int) -> "GridSpec":
        return cls(((-half_width, half_width), (-half_width, half_width)), (n, n))

    def axes(self):
        return tuple(np.linspace(lo, hi, int(n)) for (lo, hi), n in zip(self.extent, self.resolution))

    def spacing(self):
        return tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(self.extent, self.resolution))

    def max_abs(self) -> float:
        return max(abs(v) for pair in self.extent for v in pair)


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Real values sampled on a :class:`GridSpec`; ``values[i, k]`` sits at (x1[i], x2[k])."""

    spec: GridSpec
    values: np.ndarray
    epsilon: float | None = None
    kernel: str = GAUSSIAN
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != tuple(int(n) for n in self.spec.resolution):
            raise BadGridSpec("values do not match the grid resolution")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("density has non-finite values")

    @property
    def ndim(self) -> int:
        return 2

    @property
    def extent(self):
        return self.spec.extent

    @property
    def resolution(self):
        return self.spec.resolution

    def axes(self):
        return self.spec.axes()

    def integral(self) -> float:
        dx, dy = self.spec.spacing()
        return float(self.values.sum() * dx * dy)

    def argmax(self):
        i, k = np.unravel_index(np.argmax(self.values), self.values.shape)
        x1, x2 = self.axes()
        return float(x1[i]), float(x2[k])


def _validate_kernel(kernel, epsilon, cutoff):
    if kernel not in KERNELS:
        raise ValidationError(f"unknown kernel {kernel!r}; choose from {KERNELS}")
    if kernel == GAUSSIAN and (epsilon is None or not epsilon > 0):
        raise ValidationError("the gaussian kernel needs epsilon > 0")
    if kernel == RAISED_COSINE and (cutoff is None or not cutoff > 0):
        raise ValidationError("the raised-cosine kernel needs a cutoff > 0")


def smear_kernel_1d(u, kernel=GAUSSIAN, epsilon=None, cutoff=None):
    """1-d factor k(u) of the separable spatial smoothing kernel."""
    u = np.asarray(u, dtype=float)
    if kernel == GAUSSIAN:
        return np.exp(-u * u / (4 * epsilon)) / math.sqrt(4 * math.pi * epsilon)
    r = cutoff
    s = r * u / math.pi
    # (1/2pi) int_{-R}^{R} (1 + cos(pi t/R))/2 e^{-iut} dt
    return (r / (2 * math.pi)) * (np.sinc(s) + 0.5 * np.sinc(s - 1) + 0.5 * np.sinc(s + 1))


def window(xi, kernel=GAUSSIAN, epsilon=None, cutoff=None):
    """Frequency-domain multiplier for a 1-d array of frequencies."""
    xi = np.asarray(xi, dtype=float)
    if kernel == GAUSSIAN:
        return np.exp(-epsilon * xi * xi)
    return np.where(np.abs(xi) <= cutoff, 0.5 * (1 + np.cos(np.pi * xi / cutoff)), 0.0)


def smear_measure(
    mu: SignedDiscreteMeasure,
    epsilon: float | None,
    grid: GridSpec,
    *,
    kernel: str = GAUSSIAN,
    cutoff: float | None = None,
) -> DensityGrid:
    """Closed-form convolution of a 2-d signed measure with the smoothing kernel."""
    if mu.ndim != 2:
        raise DimMismatch("smearing is implemented for 2-d measures only")
    if len(mu) == 0:
        raise EmptyMeasure("measure has no atoms")
    _validate_kernel(kernel, epsilon, cutoff)
    x1, x2 = grid.axes()
    k1 = smear_kernel_1d(x1[None, :] - mu.points[:, :1], kernel, epsilon, cutoff)
    k2 = smear_kernel_1d(x2[None, :] - mu.points[:, 1:], kernel, epsilon, cutoff)
    values = (k1 * mu.weights[:, None]).T @ k2
    return DensityGrid(grid, values, epsilon, kernel, dict(mu.meta))


def measure_characteristic(mu: SignedDiscreteMeasure, xi) -> np.ndarray:
    """sum_a w_a exp(i a . xi) for each row of ``xi``."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    return np.exp(1j * xi @ mu.points.T) @ mu.weights


def _support_radius(ops: OperatorTuple) -> float:
    return math.sqrt(sum(max(abs(op.lambda_min), abs(op.lambda_max)) ** 2 for op in ops))


def frequency_axis(reach, support_radius, kernel, epsilon, cutoff, freq_extent=None, freq_samples=None):
    """Symmetric frequency samples for quadrature of a windowed characteristic function.

    ``reach`` is the largest |x| that will be evaluated.  The sample spacing
    keeps aliased copies of the density (period 2 pi / dxi) off the
    evaluation region.
    """
    if kernel == GAUSSIAN:
        r = freq_extent if freq_extent is not None else math.sqrt(-math.log(TRUNCATION) / epsilon)
        tail = 12 * math.sqrt(epsilon)
    else:
        r = cutoff
        # raised-cosine kernel only decays like |u|^-3
        tail = 40 * (2 * math.pi / cutoff)
    period = reach + support_radius + tail
    dxi_max = min(math.pi / max(reach, 1e-12), 2 * math.pi / period)
    if freq_samples is None:
        half = max(int(math.ceil(r / dxi_max)), 1)
    else:
        if freq_samples < 3:
            raise QuadratureUnderresolved("need at least 3 frequency samples")
        half = (int(freq_samples) - 1) // 2
        if r / half > dxi_max * (1 + 1e-12):
            raise QuadratureUnderresolved(
                f"frequency spacing {r / half:.4g} exceeds the Nyquist limit {dxi_max:.4g} for this extent"
            )
    return np.linspace(-r, r, 2 * half + 1)


def regularized_density(
    char_fn,
    points_or_grid,
    *,
    support_radius: float,
    epsilon: float | None = None,
    kernel: str = GAUSSIAN,
    cutoff: float | None = None,
    freq_extent: float | None = None,
    freq_samples: int | None = None,
):
    """(2 pi)^-2 sum_xi char_fn(xi) window(xi) exp(-i x . xi) dxi^2.

    ``char_fn`` maps an (N, 2) array of real frequencies to N complex values.
    Returns a :class:`DensityGrid` for a grid spec, else a 1-d array of values
    at the given points.
    """
    _validate_kernel(kernel, epsilon, cutoff)
    on_grid = isinstance(points_or_grid, GridSpec)
    if on_grid:
        x1, x2 = points_or_grid.axes()
        reach = points_or_grid.max_abs()
    else:
        pts = np.atleast_2d(np.asarray(points_or_grid, dtype=float))
        if pts.shape[1] != 2:
            raise DimMismatch("points must be 2-d")
        reach = float(np.max(np.abs(pts))) if pts.size else 1.0
    xi = frequency_axis(reach, support_radius, kernel, epsilon, cutoff, freq_extent, freq_samples)
    dxi = xi[1] - xi[0]
    g1, g2 = np.meshgrid(xi, xi, indexing="ij")
    fvals = np.asarray(char_fn(np.stack([g1.ravel(), g2.ravel()], axis=1))).reshape(g1.shape)
    w = window(xi, kernel, epsilon, cutoff)
    spectrum = fvals * w[:, None] * w[None, :]
    scale = dxi * dxi / (4 * math.pi ** 2)
    if on_grid:
        e1 = np.exp(-1j * np.outer(x1, xi))
        e2 = np.exp(-1j * np.outer(x2, xi))
        vals = scale * (e1 @ spectrum @ e2.T)
    else:
        e1 = np.exp(-1j * np.outer(pts[:, 0], xi))
        e2 = np.exp(-1j * np.outer(pts[:, 1], xi))
        vals = scale * np.einsum("pk,kl,pl->p", e1, spectrum, e2)
    residue = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
    if residue > 1e-8 * max(1.0, float(np.max(np.abs(vals.real)))):
        raise ImaginaryResidue(f"regularized density has imaginary residue {residue:.3e}")
    real = vals.real
    if on_grid:
        meta = {"freq_extent": float(xi[-1]), "freq_samples": int(xi.size), "imag_residue": residue}
        return DensityGrid(points_or_grid, real, epsilon, kernel, meta)
    return real


def regularized_wigner(
    ops: OperatorTuple,
    rho: DensityMatrix,
    epsilon: float | None,
    grid,
    freq_extent: float | None = None,
    freq_samples: int | None = None,
    *,
    kernel: str = GAUSSIAN,
    cutoff: float | None = None,
):
    """Regularized Wigner distribution of a pair of observables."""
    if ops.n != 2:
        raise DimMismatch("regularized_wigner renders pairs of observables only")
    ev = QcfEvaluator(ops, rho)
    out = regularized_density(
        ev.f_w_many,
        grid,
        support_radius=_support_radius(ops),
        epsilon=epsilon,
        kernel=kernel,
        cutoff=cutoff,
        freq_extent=freq_extent,
        freq_samples=freq_samples,
    )
    if isinstance(out, DensityGrid):
        out.meta.update(labels=list(ops.labels), distribution="wigner")
    return out


def regularized_mh(ops, rho, m, epsilon, grid, *, kernel=GAUSSIAN, cutoff=None, freq_samples=None):
    """Smeared p_MH_m computed on the Fourier side from f_MH_m (no atoms involved)."""
    if ops.n != 2:
        raise DimMismatch("only pairs of observables are rendered")
    ev = QcfEvaluator(ops, rho)
    return regularized_density(
        lambda z: ev.f_mh_many(m, z),
        grid,
        support_radius=_support_radius(ops),
        epsilon=epsilon,
        kernel=kernel,
        cutoff=cutoff,
        freq_samples=freq_samples,
    )


def mass_outside_disk(grid: DensityGrid, radius: float, margin: float = 0.0) -> float:
    """Fraction of sum |values| lying at |x| > radius + margin."""
    if radius <= 0:
        raise ValidationError("radius must be positive")
    x1, x2 = grid.axes()
    r = np.hypot(x1[:, None], x2[None, :])
    total = np.abs(grid.values).sum()
    if total == 0:
        return 0.0
    return float(np.abs(grid.values[r > radius + margin]).sum() / total)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points, tol: float = 1e-12):
    """Counter-clockwise hull vertices (monotone chain); collinear points dropped."""
    pts = sorted(set(map(tuple, np.round(np.asarray(points, dtype=float), 14))))
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= tol:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= tol:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return np.array(hull, dtype=float)


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Counter-clockwise vertex list; may degenerate to a segment or a point."""

    vertices: np.ndarray

    def support(self, angle) -> float:
        d = np.array([math.cos(angle), math.sin(angle)])
        return float(np.max(self.vertices @ d))

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def contains(self, point, tol: float = 1e-9) -> bool:
        p = np.asarray(point, dtype=float)
        v = self.vertices
        if len(v) == 1:
            return bool(np.linalg.norm(p - v[0]) <= tol)
        if len(v) == 2:
            a, b = v
            ab = b - a
            t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0, 1)
            return bool(np.linalg.norm(a + t * ab - p) <= tol)
        for a, b in zip(v, np.roll(v, -1, axis=0)):
            edge = b - a
            if (edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0])) < -tol * np.linalg.norm(edge):
                return False
        return True

    def area(self) -> float:
        if len(self.vertices) < 3:
            return 0.0
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def joint_numerical_range_2d(a1: HermitianOperator, a2: HermitianOperator, n_angles: int = 64) -> ConvexPolygon:
    """Outer boundary samples of {(tr(s A1), tr(s A2))} from top eigenvectors of cos t A1 + sin t A2."""
    if a1.dim != a2.dim:
        raise DimMismatch("operators have different dimensions")
    if int(n_angles) < 8:
        raise ValidationError("n_angles must be at least 8")
    m1, m2 = np.asarray(a1.entries), np.asarray(a2.entries)
    pts = []
    for k in range(int(n_angles)):
        t = 2 * math.pi * k / n_angles
        _, u = np.linalg.eigh(math.cos(t) * m1 + math.sin(t) * m2)
        v = u[:, -1]
        pts.append((np.vdot(v, m1 @ v).real, np.vdot(v, m2 @ v).real))
    return ConvexPolygon(convex_hull(pts))
