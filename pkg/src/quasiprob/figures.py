"""Panel sets for the spin-1/2 and spin-3/2 density figures, and checks that
the rendered bumps sit where the atom lattice or the disk predicts.

A Margenau-Hill panel is *resolved* when neighbouring lattice points are at
least ``RESOLVED_SPACING`` Gaussian widths apart.  Only then do individual
atoms show up as separate extrema, so only then are extrema matched to
lattice points.  Unresolved panels are checked for containment in the
lattice box dilated by three widths.

Wigner panels of the Pauli pair are checked against an independent 1-d
Hankel-transform evaluation of the same regularized density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, interpolate, ndimage, optimize, special

from .measure import SignedDiscreteMeasure, mh_measure
from .operators import (
    DensityMatrix,
    Normalization,
    OperatorTuple,
    eigen_lattice,
    make_density,
    maximally_mixed,
    spin_operator,
)
from .spin_half import SpinHalfState
from .wigner_reg import DensityGrid, GridSpec, regularized_wigner, smear_measure

__all__ = [
    "EPSILON_SWEEP",
    "Extremum",
    "Panel",
    "PanelCheck",
    "local_extrema",
    "radial_wigner_profile",
    "predicted_wigner_density",
    "check_panel",
    "figure_panels",
    "pauli_pair",
    "spin_pair",
    "tilted_state",
]

EPSILON_SWEEP = (0.001, 0.005, 0.01, 0.02, 0.05)
RESOLVED_SPACING = 4.0
REL_THRESHOLD = 0.05


def pauli_pair() -> OperatorTuple:
    return OperatorTuple.of(
        spin_operator(0.5, math.pi / 2, 0.0, Normalization.PAULI),
        spin_operator(0.5, math.pi / 2, math.pi / 2, Normalization.PAULI),
        labels=["Sx", "Sy"],
    )


def spin_pair(j) -> OperatorTuple:
    return OperatorTuple.of(
        spin_operator(j, math.pi / 2, 0.0),
        spin_operator(j, math.pi / 2, math.pi / 2),
        labels=["Sx", "Sy"],
    )


def tilted_state() -> DensityMatrix:
    """Pure state with in-plane Bloch vector (1/sqrt 2, 1/sqrt 2)."""
    off = (1 - 1j) / math.sqrt(2)
    return make_density(0.5 * np.array([[1, off], [off.conjugate(), 1]]))


@dataclass(frozen=True)
class Extremum:
    x1: float
    x2: float
    value: float
    sign: int


@dataclass(frozen=True, eq=False)
class Panel:
    name: str
    density: DensityGrid
    kind: str
    measure: SignedDiscreteMeasure | None = None
    lattice: np.ndarray | None = None
    state: SpinHalfState | None = None


@dataclass(frozen=True)
class PanelCheck:
    name: str
    mode: str
    ok: bool
    n_extrema: int
    worst_cells: float
    detail: dict = field(default_factory=dict)


def local_extrema(grid: DensityGrid, rel_threshold: float = REL_THRESHOLD) -> list:
    """Local maxima and minima over 3x3 neighbourhoods.

    Plateaus (ties between neighbouring pixels) count once, and only when
    every pixel around them is strictly lower.  A plateau sits at its
    centroid, or on its medial line when the centroid falls outside it (a
    ring).
    Extrema smaller than ``rel_threshold`` times the largest |value| are
    ignored.
    """
    v = grid.values
    floor = rel_threshold * float(np.max(np.abs(v)))
    x1, x2 = grid.axes()
    idx1, idx2 = np.arange(x1.size), np.arange(x2.size)
    out = []
    for sign in (1, -1):
        w = sign * v
        mask = (w == ndimage.maximum_filter(w, size=3, mode="nearest")) & (w >= floor) & (w > 0)
        labels, count = ndimage.label(mask, structure=np.ones((3, 3)))
        for lab, box in enumerate(ndimage.find_objects(labels), start=1):
            # widen the box by one pixel so the plateau's rim is visible
            box = tuple(slice(max(b.start - 1, 0), b.stop + 1) for b in box)
            comp = labels[box] == lab
            rim = ndimage.binary_dilation(comp, structure=np.ones((3, 3))) & ~comp
            if rim.any() and w[box][rim].max() >= w[box][comp].min():
                continue  # a terrace on a slope, not a peak
            ci, ck = ndimage.center_of_mass(mask, labels, lab)
            i, k = int(round(ci)), int(round(ck))
            if labels[i, k] != lab:
                # a ring-shaped plateau: take the point of its medial line
                # (farthest from the plateau edge) nearest the centroid
                depth = ndimage.distance_transform_edt(np.pad(labels == lab, 1))[1:-1, 1:-1]
                pix = np.argwhere(depth == depth.max())
                i, k = pix[np.argmin(np.hypot(pix[:, 0] - ci, pix[:, 1] - ck))]
                ci, ck = float(i), float(k)
            out.append(Extremum(float(np.interp(ci, idx1, x1)), float(np.interp(ck, idx2, x2)), float(v[i, k]), sign))
    return out


def radial_wigner_profile(r, epsilon: float, samples: int = 4001):
    """Untilted regularized Wigner density of the Pauli pair, and its radial
    derivative, by a 1-d Hankel transform of cos(rho) exp(-eps rho^2)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    top = math.sqrt(-math.log(1e-14) / epsilon)
    rho = np.linspace(0.0, top, samples)
    f = np.cos(rho) * np.exp(-epsilon * rho * rho) * rho
    arg = np.outer(r, rho)
    p = integrate.simpson(f * special.j0(arg), x=rho, axis=1) / (2 * math.pi)
    dp = -integrate.simpson(f * rho * special.j1(arg), x=rho, axis=1) / (2 * math.pi)
    return p, dp


class _RadialTable:
    """Cubic-spline tables of the radial profile and its derivative."""

    def __init__(self, epsilon: float, reach: float, step: float = 2e-3):
        r = np.arange(0.0, reach + 10 * step, step)
        p, dp = radial_wigner_profile(r, epsilon)
        self.epsilon = epsilon
        self.r = r
        self.p = interpolate.CubicSpline(r, p)
        self.dp = interpolate.CubicSpline(r, dp)

    def field(self, state: SpinHalfState, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.hypot(x[:, 0], x[:, 1])
        s = np.array([state.s1, state.s2])
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[:, None] > 0, x / np.where(r > 0, r, 1.0)[:, None], 0.0)
        return (1 + x @ s) * self.p(r) + 2 * self.epsilon * self.dp(r) * (unit @ s)

    def radial_extrema(self) -> np.ndarray:
        roots = self.dp.roots(extrapolate=False)
        return roots[(roots > 0) & (roots < self.r[-1])]


def predicted_wigner_density(state: SpinHalfState, epsilon: float, x) -> np.ndarray:
    """Gaussian-smeared (1 + s.x) p0(|x|), written through the radial profile:
    (1 + s.x) P(|x|) + 2 eps s.grad P."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    reach = float(np.max(np.hypot(x[:, 0], x[:, 1]))) if x.size else 1.0
    return _RadialTable(epsilon, reach).field(state, x)


def _cell(grid: DensityGrid) -> float:
    return float(max(grid.spec.spacing()))


def _sigma(grid: DensityGrid) -> float:
    return math.sqrt(2 * grid.epsilon)


def _lattice_spacing(lattice: np.ndarray) -> float:
    gaps = []
    for axis in range(lattice.shape[1]):
        vals = np.unique(lattice[:, axis])
        if vals.size > 1:
            gaps.append(float(np.min(np.diff(vals))))
    return min(gaps) if gaps else math.inf


def _check_mh(panel: Panel, extrema) -> PanelCheck:
    grid, mu = panel.density, panel.measure
    cell, sigma = _cell(grid), _sigma(grid)
    resolved = _lattice_spacing(panel.lattice) >= RESOLVED_SPACING * sigma
    if resolved:
        worst, ok = 0.0, True
        for e in extrema:
            gap = np.max(np.abs(mu.points - [e.x1, e.x2]), axis=1)
            j = int(np.argmin(gap))
            worst = max(worst, float(gap[j]) / cell)
            ok &= gap[j] <= cell and np.sign(mu.weights[j]) == e.sign
        return PanelCheck(panel.name, "lattice", bool(ok), len(extrema), worst)
    box = float(np.max(np.abs(panel.lattice)))
    excess = max((max(abs(e.x1), abs(e.x2)) - box for e in extrema), default=0.0)
    ok = excess <= 3 * sigma
    return PanelCheck(panel.name, "lattice-box", bool(ok), len(extrema), excess / cell, {"sigma": sigma})


def _check_wigner(panel: Panel, extrema) -> PanelCheck:
    grid, state = panel.density, panel.state
    cell = _cell(grid)
    table = _RadialTable(grid.epsilon, grid.spec.max_abs() * math.sqrt(2))
    worst = 0.0
    if math.hypot(state.s1, state.s2) < 1e-12:
        # rotationally symmetric: only the radius of an extremum is predicted
        rings = table.radial_extrema()
        for e in extrema:
            worst = max(worst, float(np.min(np.abs(rings - math.hypot(e.x1, e.x2)))) / cell)
    else:
        # a ridge sampled on a coarse grid shows several pixel maxima; those
        # count as explained when the oracle sampled on the same grid has them too
        x1, x2 = grid.axes()
        pts = np.stack(np.meshgrid(x1, x2, indexing="ij"), axis=-1).reshape(-1, 2)
        sampled = DensityGrid(grid.spec, table.field(state, pts).reshape(grid.values.shape), grid.epsilon)
        ref = local_extrema(sampled)
        for e in extrema:
            res = optimize.minimize(
                lambda x: -e.sign * float(table.field(state, x)[0]),
                [e.x1, e.x2],
                method="Nelder-Mead",
                options={"xatol": 1e-7, "fatol": 1e-12},
            )
            dist = float(np.max(np.abs(res.x - [e.x1, e.x2])))
            for r in ref:
                if r.sign == e.sign:
                    dist = min(dist, max(abs(r.x1 - e.x1), abs(r.x2 - e.x2)))
            worst = max(worst, dist / cell)
    return PanelCheck(panel.name, "disk", bool(worst <= 1.0), len(extrema), worst)


def check_panel(panel: Panel, rel_threshold: float = REL_THRESHOLD) -> PanelCheck:
    extrema = local_extrema(panel.density, rel_threshold)
    if panel.kind == "wigner":
        return _check_wigner(panel, extrema)
    return _check_mh(panel, extrema)


def _mh_panel(name, ops, rho, m, eps, spec) -> Panel:
    mu = mh_measure(ops, rho, m)
    return Panel(name, smear_measure(mu, eps, spec), "mh", mu, eigen_lattice(ops, m).points)


def _wigner_panel(name, ops, rho, eps, spec) -> Panel:
    state = SpinHalfState.from_density(rho, ops[0], ops[1])
    return Panel(name, regularized_wigner(ops, rho, eps, spec), "wigner", state=state)


def figure_panels(figure: int, resolution: int = 256) -> list:
    """Panels of figure 1 (two states), 3 (order series) or 8 (epsilon sweep)."""
    if figure == 1:
        ops, spec = pauli_pair(), GridSpec.square(1.5, resolution)
        panels = []
        for tag, rho in (("mixed", maximally_mixed(2)), ("tilted", tilted_state())):
            panels.append(_mh_panel(f"fig1_{tag}_mh1", ops, rho, 1, 0.01, spec))
            panels.append(_wigner_panel(f"fig1_{tag}_wigner", ops, rho, 0.01, spec))
        return panels
    if figure == 3:
        ops, rho, spec = pauli_pair(), maximally_mixed(2), GridSpec.square(1.5, resolution)
        panels = [_mh_panel(f"fig3_mh{m}", ops, rho, m, 0.01, spec) for m in (1, 3, 5, 10)]
        return panels + [_wigner_panel("fig3_wigner", ops, rho, 0.01, spec)]
    if figure == 8:
        ops, rho, spec = spin_pair(1.5), maximally_mixed(4), GridSpec.square(2.0, resolution)
        mu = mh_measure(ops, rho, 5)
        lattice = eigen_lattice(ops, 5).points
        return [
            Panel(f"fig8_eps{eps:g}", smear_measure(mu, eps, spec), "mh", mu, lattice) for eps in EPSILON_SWEEP
        ]
    raise ValueError(f"no panel set for figure {figure}; choose 1, 3 or 8")
