"""Verification suites run by ``quasiprob verify``.

Each suite fills a :class:`RunReport` with named checks (measured value
against a tolerance).  Random inputs come from a seeded generator.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from .figures import check_panel, figure_panels, pauli_pair, spin_pair, tilted_state
from .io import RunReport
from .measure import marginal, measure_l1_distance, mh_measure, spectral_marginal
from .operators import (
    Normalization,
    OperatorTuple,
    direction,
    eigen_lattice,
    eigenstate,
    make_density,
    make_hermitian,
    maximally_mixed,
    spin_operator,
)
from .qcf import QcfEvaluator, sup_qcf_distance, supporting_function, trotter_error_bound
from .spin_half import (
    SpinHalfState,
    de_moivre_residual,
    mehler_heine_jacobi_residual,
    mehler_heine_residual,
    p_mh_spin_half,
)
from .wigner_reg import (
    RAISED_COSINE,
    GridSpec,
    mass_outside_disk,
    regularized_wigner,
    smear_measure,
)

__all__ = [
    "DEFAULT_SEED",
    "SUITES",
    "random_hermitian",
    "random_density",
    "bloch_density",
    "standard_cases",
    "convergence_rows",
    "run_suite",
]

DEFAULT_SEED = 20240917
ORDERS = tuple(range(1, 9))
CONVERGENCE_ORDERS = (1, 2, 4, 8, 16)
SMEARED_ORDERS = (1, 2, 4, 8)


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return make_hermitian(scale * 0.5 * (a + a.conj().T))


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return make_density(rho / np.trace(rho).real)


def bloch_density(s):
    """(I + s . sigma) / 2 for a Bloch vector with |s| <= 1."""
    sx, sy, sz = s
    return make_density(0.5 * np.array([[1 + sz, sx - 1j * sy], [sx + 1j * sy, 1 - sz]]))


def commuting_pair():
    return OperatorTuple.of(np.diag([1.0, -1.0, 0.5]), np.diag([2.0, 0.0, 2.0]), labels=["D1", "D2"])


def commuting_triple():
    return OperatorTuple.of(np.diag([1.0, -1.0, 0.5]), np.diag([2.0, 0.0, 2.0]), np.diag([0.0, 1.0, 1.0]))


@functools.lru_cache(maxsize=4)
def standard_cases(seed: int = DEFAULT_SEED):
    """(name, ops, rho) for the mass and marginal checks."""
    rng = np.random.default_rng(seed)
    y4 = spin_operator(4, math.pi / 2, math.pi / 2)
    return (
        ("spin1/2-pauli", pauli_pair(), tilted_state()),
        ("spin3/2-hbar", spin_pair(1.5), random_density(rng, 4)),
        ("spin3/2-hbar-mixed", spin_pair(1.5), maximally_mixed(4)),
        ("spin4-hbar", spin_pair(4), eigenstate(y4, +1)),
        ("random3x3", OperatorTuple.of(random_hermitian(rng, 3), random_hermitian(rng, 3)), random_density(rng, 3)),
        ("commuting-triple", commuting_triple(), random_density(rng, 3)),
    )


@functools.lru_cache(maxsize=128)
def _case_measure(seed, index, m):
    _, ops, rho = standard_cases(seed)[index]
    return mh_measure(ops, rho, m)


def _suite_spin_identities(report, rng):
    eye = np.eye(2)
    pairs = rng.uniform([0, 0], [math.pi, 2 * math.pi], size=(50, 2))
    ops = [spin_operator(0.5, t, p, Normalization.PAULI) for t, p in pairs]
    dirs = [direction(t, p) for t, p in pairs]
    tol = 1e-12

    def worst(fn):
        return max(fn(k) for k in range(len(ops)))

    report.run("square-is-identity", lambda: worst(lambda k: np.linalg.norm(ops[k].entries @ ops[k].entries - eye)), tol)
    report.run("determinant", lambda: worst(lambda k: abs(np.linalg.det(ops[k].entries) + 1)), tol)
    report.run("trace", lambda: worst(lambda k: abs(np.trace(ops[k].entries))), tol)

    def anti(k):
        a, b = ops[k].entries, ops[(k + 1) % len(ops)].entries
        return np.linalg.norm(a @ b + b @ a - 2 * np.dot(dirs[k], dirs[(k + 1) % len(ops)]) * eye)

    def comm(k):
        j = (k + 1) % len(ops)
        a, b = ops[k].entries, ops[j].entries
        c = np.cross(dirs[k], dirs[j])
        # S . c for an unnormalized axis, built from the three Pauli matrices
        sig = [spin_operator(0.5, *ang, Normalization.PAULI).entries for ang in
               ((math.pi / 2, 0.0), (math.pi / 2, math.pi / 2), (0.0, 0.0))]
        target = 2j * sum(ck * s for ck, s in zip(c, sig))
        return np.linalg.norm(a @ b - b @ a - target)

    report.run("anticommutator", lambda: worst(anti), tol)
    report.run("commutator", lambda: worst(comm), tol)


def _suite_mass(report, rng, seed):
    for idx, (name, _, _) in enumerate(standard_cases(seed)):
        report.run(
            f"mass[{name}]",
            lambda idx=idx: max(abs(_case_measure(seed, idx, m).total_mass() - 1) for m in ORDERS),
            1e-10,
        )


def _suite_marginals(report, rng, seed):
    for idx, (name, ops, rho) in enumerate(standard_cases(seed)):

        def worst(idx=idx, ops=ops, rho=rho):
            out = 0.0
            for m in ORDERS:
                mu = _case_measure(seed, idx, m)
                for axis in range(ops.n):
                    out = max(out, measure_l1_distance(marginal(mu, axis), spectral_marginal(rho, ops[axis])))
            return out

        report.run(f"marginal[{name}]", worst, 1e-9)


def _suite_lattice(report, rng, seed):
    cases = (("spin1/2", pauli_pair(), 1), ("spin3/2", spin_pair(1.5), 3), ("spin4", spin_pair(4), 8))
    for name, ops, k in cases:
        rho = maximally_mixed(ops.dim)

        def mismatches(ops=ops, rho=rho, k=k):
            bad = 0
            for m in range(1, 6):
                mu = mh_measure(ops, rho, m, keep_lattice=True)
                bad += len(mu) != (k * m + 1) ** 2
                bad += len(eigen_lattice(ops, m)) != (k * m + 1) ** 2
            return bad

        report.run(f"keep-lattice-count[{name}]", mismatches, 0)

    def off_lattice():
        bad = 0
        for idx, (_, ops, _) in enumerate(standard_cases(seed)):
            for m in (1, 3, 5):
                lat = eigen_lattice(ops, m)
                bad += sum(not lat.contains(p) for p, _ in _case_measure(seed, idx, m))
        return bad

    report.run("atoms-on-lattice", off_lattice, 0)


def _suite_closed_form(report, rng, seed):
    ops = pauli_pair()
    vecs = rng.normal(size=(20, 3))
    vecs *= (rng.uniform(size=(20, 1)) ** (1 / 3)) / np.linalg.norm(vecs, axis=1, keepdims=True)

    def worst():
        out = 0.0
        for s in vecs:
            rho = bloch_density(s)
            state = SpinHalfState.from_density(rho, ops[0], ops[1])
            for m in ORDERS:
                out = max(out, measure_l1_distance(p_mh_spin_half(state, m), mh_measure(ops, rho, m)))
        return out

    report.run("closed-form-vs-general", worst, 1e-9)


def _suite_de_moivre(report, rng, seed):
    xi = rng.uniform(-10, 10, size=(200, 2))
    ms = rng.integers(1, 21, size=200)
    report.run(
        "de-moivre-residual",
        lambda: max(de_moivre_residual(a, b, int(m)) for (a, b), m in zip(xi, ms)),
        1e-10,
    )


def _suite_commuting(report, rng, seed):
    ops = commuting_pair()
    rho = random_density(rng, 3)
    base = mh_measure(ops, rho, 1)
    report.run("collapse-to-first-order", lambda: max(measure_l1_distance(mh_measure(ops, rho, m), base) for m in range(2, 9)), 1e-10)
    ev = QcfEvaluator(ops, rho)
    grid = _frequency_grid(21, math.pi)
    report.run("qcf-agree", lambda: max(sup_qcf_distance(ev, m, grid) for m in (1, 4)), 1e-12)


def _suite_paley_wiener(report, rng, seed):
    cases = (("spin1/2", pauli_pair()), ("spin3/2", spin_pair(1.5)))
    z = rng.uniform(-3, 3, size=(100, 2)) + 1j * rng.uniform(-3, 3, size=(100, 2))
    for name, ops in cases:
        for tag, rho in (("mixed", maximally_mixed(ops.dim)), ("random", random_density(rng, ops.dim))):
            ev = QcfEvaluator(ops, rho)
            bound = np.array([math.exp(supporting_function(ops, zz.imag)) for zz in z])

            def excess(ev=ev, bound=bound):
                return max(float(np.max(np.abs(ev.f_mh_many(m, -z)) - bound)) for m in (1, 4))

            report.run(f"paley-wiener[{name},{tag}]", excess, 1e-9)


def _suite_mehler_heine(report, rng, seed):
    orders = (10, 100, 1000)

    def increases(fn):
        vals = [fn(1.0, 0.5, m) for m in orders]
        return sum(b >= a for a, b in zip(vals, vals[1:]))

    report.run("residual-decreasing", lambda: increases(mehler_heine_residual), 0)
    report.run("jacobi-residual-decreasing", lambda: increases(mehler_heine_jacobi_residual), 0)
    z1 = rng.uniform(-20, 20, size=25)
    report.run(
        "axis-exact",
        lambda: max(mehler_heine_residual(a, 0.0, m) for a in z1 for m in (1, 7, 10, 100, 1000, 10**5)),
        1e-12,
    )


def _frequency_grid(n, extent):
    axis = np.linspace(-extent, extent, n)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([g1.ravel(), g2.ravel()], axis=1)


def convergence_rows(ops, rho, orders=CONVERGENCE_ORDERS, n=21, extent=math.pi, *, cutoff=math.pi, space_n=65):
    """(m, sup |f_MH_m - f_W|, max Trotter bound, smeared sup distance) per order.

    The smeared distance uses the raised-cosine window with the given
    cutoff; it is NaN for tuples that are not pairs.
    """
    from .io import ConvergenceRow

    ev = QcfEvaluator(ops, rho)
    grid = _frequency_grid(n, extent)
    fw = ev.f_w_many(grid)
    wigner = None
    if ops.n == 2:
        half = math.sqrt(sum(max(abs(op.lambda_min), abs(op.lambda_max)) ** 2 for op in ops)) + 0.5
        spec = GridSpec.square(half, space_n)
        wigner = regularized_wigner(ops, rho, None, spec, kernel=RAISED_COSINE, cutoff=cutoff)
    rows = []
    for m in orders:
        dist = float(np.max(np.abs(fw - ev.f_mh_many(m, grid))))
        bound = max(trotter_error_bound(ev, xi, m) for xi in grid)
        smeared = math.nan
        if wigner is not None:
            sm = smear_measure(mh_measure(ops, rho, m), None, wigner.spec, kernel=RAISED_COSINE, cutoff=cutoff)
            smeared = float(np.max(np.abs(sm.values - wigner.values)))
        rows.append(ConvergenceRow(m, dist, bound, smeared))
    return rows


def _suite_convergence(report, rng, seed):
    ops, rho = pauli_pair(), maximally_mixed(2)
    ev = QcfEvaluator(ops, rho)
    grid = _frequency_grid(21, math.pi)
    fw = ev.f_w_many(grid)
    dists = {m: np.abs(fw - ev.f_mh_many(m, grid)) for m in CONVERGENCE_ORDERS}
    sups = [float(np.max(dists[m])) for m in CONVERGENCE_ORDERS]
    report.run("sup-distance-strictly-decreasing", lambda: sum(b >= a for a, b in zip(sups, sups[1:])), 0)

    def over_bound():
        worst = -math.inf
        for m in CONVERGENCE_ORDERS:
            bound = np.array([trotter_error_bound(ev, xi, m) for xi in grid])
            worst = max(worst, float(np.max(dists[m] - bound)))
        return worst

    report.run("below-trotter-bound", over_bound, 0.0)

    def smeared_increases():
        rows = convergence_rows(ops, rho, SMEARED_ORDERS)
        vals = [r.smeared_distance for r in rows]
        return sum(b >= a for a, b in zip(vals, vals[1:]))

    report.run("smeared-distance-decreasing", smeared_increases, 0)


def rotational_residual(ops, rho, epsilon, radii, n_angles=12):
    """Max spread of the regularized Wigner density over angles at fixed radius."""
    theta = np.linspace(0, 2 * math.pi, n_angles, endpoint=False)
    pts = np.array([(r * math.cos(t), r * math.sin(t)) for r in radii for t in theta])
    vals = regularized_wigner(ops, rho, epsilon, pts).reshape(len(radii), n_angles)
    return float(np.max(vals.max(axis=1) - vals.min(axis=1)))


def _suite_wigner_support(report, rng, seed):
    ops, rho = pauli_pair(), maximally_mixed(2)
    eps = 0.01
    margin = 5 * math.sqrt(2 * eps)
    half = 1 + margin + 0.5
    dens = regularized_wigner(ops, rho, eps, GridSpec.square(half, 161))
    report.run("mass-outside-disk[spin1/2]", lambda: mass_outside_disk(dens, 1.0, margin), 1e-3)
    report.run("integral[spin1/2]", lambda: abs(dens.integral() - 1), 1e-3)
    report.run("rotational-symmetry[spin1/2]", lambda: rotational_residual(ops, rho, eps, np.linspace(0.1, 1.4, 14)), 1e-6)
    tilted = regularized_wigner(ops, tilted_state(), eps, GridSpec.square(half, 161))
    report.run("mass-outside-disk[spin1/2,tilted]", lambda: mass_outside_disk(tilted, 1.0, margin), 1e-3)
    ops4 = spin_pair(4)
    d4 = regularized_wigner(ops4, maximally_mixed(9), 0.1, GridSpec.square(6.0, 121))
    report.run("mass-outside-disk[spin4]", lambda: mass_outside_disk(d4, 4.0, 5 * math.sqrt(0.2)), 1e-2)


def _suite_figures(report, rng, seed):
    for fig in (1, 3, 8):
        for panel in figure_panels(fig):
            report.run(f"{panel.name}", lambda panel=panel: 0 if check_panel(panel).ok else 1, 0)


SUITES = {
    "spin-identities": lambda r, rng, seed: _suite_spin_identities(r, rng),
    "mass": _suite_mass,
    "marginals": _suite_marginals,
    "lattice": _suite_lattice,
    "closed-form": _suite_closed_form,
    "de-moivre": _suite_de_moivre,
    "commuting": _suite_commuting,
    "paley-wiener": _suite_paley_wiener,
    "mehler-heine": _suite_mehler_heine,
    "convergence": _suite_convergence,
    "wigner-support": _suite_wigner_support,
    "figures": _suite_figures,
}


def run_suite(name: str, seed: int = DEFAULT_SEED) -> RunReport:
    """Run one suite, or every suite for ``name == "all"`` (check names are prefixed)."""
    if name == "all":
        report = RunReport("all")
        for sub in SUITES:
            for check in run_suite(sub, seed).checks:
                check.name = f"{sub}/{check.name}"
                report.add(check)
        return report
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    report = RunReport(name)
    SUITES[name](report, np.random.default_rng(seed), seed)
    return report
