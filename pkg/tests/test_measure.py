import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import as_dict, brute_force_mh, dft_weights, dict_l1
from quasiprob import (
    OperatorTuple,
    QcfEvaluator,
    eigen_lattice,
    eigenstate,
    make_density,
    make_hermitian,
    maximally_mixed,
    signed_measure,
    spin_operator,
)
from quasiprob.checks import random_density, random_hermitian
from quasiprob.errors import AtomBudgetExceeded, AxisOutOfRange, DimMismatch, ValidationError
from quasiprob.figures import spin_pair
from quasiprob.measure import (
    MatrixAtomMeasure,
    convolve_power,
    marginal,
    measure_l1_distance,
    mh_measure,
    one_step_measure,
    spectral_marginal,
)

seeds = st.integers(0, 2**32 - 1)


def rotated(rng, spectrum):
    """Random unitary conjugate of diag(spectrum): generic eigenvectors, exact eigenvalues."""
    d = len(spectrum)
    q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    a = q @ np.diag(spectrum) @ q.conj().T
    return make_hermitian(0.5 * (a + a.conj().T))


def test_first_order_four_atoms(pauli, mixed2):
    mu = mh_measure(pauli, mixed2, 1)
    assert [tuple(p) for p in mu.points] == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    assert mu.weights == pytest.approx([0.25] * 4, abs=1e-15)


def test_second_order_weights(pauli, mixed2):
    mu = mh_measure(pauli, mixed2, 2)
    assert len(mu) == 9
    assert mu.weight_at((0, 0)) == pytest.approx(-0.5, abs=1e-10)
    for p in [(1, 0), (-1, 0), (0, 1), (0, -1)]:
        assert mu.weight_at(p) == pytest.approx(0.25, abs=1e-10)
    for p in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
        assert mu.weight_at(p) == pytest.approx(0.125, abs=1e-10)
    assert mu.total_mass() == pytest.approx(1, abs=1e-10)
    assert mu.negative_mass() == pytest.approx(0.5, abs=1e-10)


def test_commuting_pair_joint_law():
    a, b, c, d, p = 1.0, -2.0, 0.5, 3.0, 0.3
    ops = OperatorTuple.of(np.diag([a, b]), np.diag([c, d]))
    rho = np.diag([p, 1 - p])
    for m in (1, 2, 5):
        mu = mh_measure(ops, make_density(rho), m)
        assert as_dict(mu) == pytest.approx({(a, c): p, (b, d): 1 - p}, abs=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_matches_path_enumeration(m, rng):
    mats = [random_hermitian(rng, 3), random_hermitian(rng, 3)]
    rho = random_density(rng, 3)
    mu = mh_measure(OperatorTuple.of(*mats), rho, m)
    ref = brute_force_mh([a.entries for a in mats], rho.entries, m)
    assert dict_l1(as_dict(mu), ref) <= 1e-12


def test_matches_path_enumeration_three_axes(rng):
    mats = [random_hermitian(rng, 2) for _ in range(3)]
    rho = random_density(rng, 2)
    mu = mh_measure(OperatorTuple.of(*mats), rho, 2)
    ref = brute_force_mh([a.entries for a in mats], rho.entries, 2)
    assert dict_l1(as_dict(mu), ref) <= 1e-12


@pytest.mark.parametrize("m", [1, 2, 3])
def test_matches_fourier_inversion(m, rng):
    # integer spectra make f_MH_m periodic, so a finite DFT inverts it exactly
    ops = OperatorTuple.of(rotated(rng, [-1.0, 0.0, 2.0]), rotated(rng, [1.0, 1.0, -1.0]))
    rho = random_density(rng, 3)
    ev = QcfEvaluator(ops, rho)
    unit = 1.0 / m
    kmin, kmax = -m - 2, 2 * m + 2
    ref = dft_weights(lambda z: ev.f_mh_many(m, z), unit, kmin, kmax)
    got = as_dict(mh_measure(ops, rho, m, keep_lattice=True))
    assert dict_l1(got, ref) <= 1e-6


def test_degenerate_levels_merge():
    ops = OperatorTuple.of(np.diag([1.0, 1.0, -1.0]), np.array([[0, 1, 0], [1, 0, 0], [0, 0, 2.0]]))
    assert ops[0].levels.tolist() == [-1.0, 1.0]
    mu = mh_measure(ops, maximally_mixed(3), 2, keep_lattice=True)
    # averages of two levels: {-1, 0, 1} x {-1, 0, 1/2, 1, 3/2, 2}
    assert len(mu) == len(eigen_lattice(ops, 2)) == 3 * 6


@st.composite
def problems(draw, max_dim=3):
    seed = draw(seeds)
    d = draw(st.integers(2, max_dim))
    n = draw(st.integers(1, 3))
    rng = np.random.default_rng(seed)
    ops = OperatorTuple.of(*(random_hermitian(rng, d) for _ in range(n)))
    return ops, random_density(rng, d)


@given(problems(), st.integers(1, 4))
def test_mass_is_one(problem, m):
    ops, rho = problem
    mu = mh_measure(ops, rho, m)
    assert abs(mu.total_mass() - 1) <= 1e-10
    assert mu.meta["imag_residue"] <= 1e-10


@given(problems(), st.integers(1, 4))
def test_marginals_are_spectral(problem, m):
    ops, rho = problem
    mu = mh_measure(ops, rho, m)
    for axis in range(ops.n):
        assert measure_l1_distance(marginal(mu, axis), spectral_marginal(rho, ops[axis])) <= 1e-9


@given(problems(), st.integers(1, 4))
def test_first_moments(problem, m):
    ops, rho = problem
    mu = mh_measure(ops, rho, m)
    for axis in range(ops.n):
        assert mu.moment(axis) == pytest.approx(rho.expectation(ops[axis]).real, abs=1e-10)


@given(problems(), st.integers(1, 3))
def test_support_on_lattice(problem, m):
    ops, rho = problem
    lat = eigen_lattice(ops, m)
    mu = mh_measure(ops, rho, m)
    assert all(lat.contains(p) for p, _ in mu)
    lo = [op.lambda_min - 1e-9 for op in ops]
    hi = [op.lambda_max + 1e-9 for op in ops]
    assert np.all((mu.points >= lo) & (mu.points <= hi))


@given(problems(), st.integers(1, 3))
def test_axis_permutation_equivariance(problem, m):
    ops, rho = problem
    order = tuple(reversed(range(ops.n)))
    a = mh_measure(ops, rho, m)
    b = mh_measure(ops.permuted(order), rho, m)
    swapped = signed_measure(a.points[:, list(order)], a.weights)
    assert measure_l1_distance(swapped, b) <= 1e-12


def test_marginal_second_order(pauli, mixed2):
    mu = mh_measure(pauli, mixed2, 2)
    marg = marginal(mu, 0)
    assert as_dict(marg) == pytest.approx({(-1.0,): 0.5, (1.0,): 0.5}, abs=1e-12)
    assert measure_l1_distance(marg, spectral_marginal(mixed2, pauli[0])) <= 1e-12


def test_marginal_of_one_dim_is_identity():
    mu = signed_measure([[0.0], [1.0]], [0.3, 0.7])
    assert measure_l1_distance(marginal(mu, 0), mu) == 0


@pytest.mark.parametrize("m", [1, 2, 5])
def test_marginal_at_x_eigenstate(pauli, m):
    rho = eigenstate(pauli[0], +1)
    assert as_dict(marginal(mh_measure(pauli, rho, m), 0)) == pytest.approx({(1.0,): 1.0}, abs=1e-12)


def test_marginal_axis_guard(pauli, mixed2):
    with pytest.raises(AxisOutOfRange):
        marginal(mh_measure(pauli, mixed2, 1), 2)


def test_spectral_marginal_examples(mixed2):
    sz = spin_operator(0.5, 0, 0, "pauli")
    assert as_dict(spectral_marginal(mixed2, sz)) == pytest.approx({(-1.0,): 0.5, (1.0,): 0.5})
    assert as_dict(spectral_marginal(eigenstate(sz, 1), sz)) == pytest.approx({(1.0,): 1.0})
    law = spectral_marginal(maximally_mixed(9), spin_pair(4)[0])
    assert law.points.ravel() == pytest.approx(np.arange(-4, 5), abs=1e-12)
    assert law.weights == pytest.approx([1 / 9] * 9)
    with pytest.raises(DimMismatch):
        spectral_marginal(maximally_mixed(3), sz)


def test_l1_examples(pauli, mixed2):
    mu = mh_measure(pauli, mixed2, 3)
    assert measure_l1_distance(mu, mu) == 0
    assert measure_l1_distance(signed_measure([[0.0]], [1.0]), signed_measure([[1.0]], [1.0])) == 2
    with pytest.raises(DimMismatch):
        measure_l1_distance(mu, signed_measure([[0.0]], [1.0]))


def test_one_step_examples(pauli):
    base = one_step_measure(OperatorTuple.of(np.diag([2.0, -2.0])), 1)
    assert base.points.ravel().tolist() == [-2.0, 2.0]
    assert np.allclose(base.weights[0], np.diag([0, 1]))
    assert np.allclose(base.weights[1], np.diag([1, 0]))
    single = one_step_measure(OperatorTuple.of(np.eye(2)), 1)
    assert len(single) == 1 and np.allclose(single.weights[0], np.eye(2))
    four = one_step_measure(pauli, 1)
    px = {lam: p for lam, p in zip(pauli[0].levels, pauli[0].projectors)}
    py = {lam: p for lam, p in zip(pauli[1].levels, pauli[1].projectors)}
    for p, w in zip(four.points, four.weights):
        assert np.allclose(w, px[p[0]] @ py[p[1]])
    with pytest.raises(ValidationError):
        one_step_measure(pauli, 1, perm=(0, 0))


def test_one_step_keeps_axis_order(pauli):
    fwd, rev = one_step_measure(pauli, 1, (0, 1)), one_step_measure(pauli, 1, (1, 0))
    assert np.array_equal(fwd.points, rev.points)
    for w1, w2 in zip(fwd.weights, rev.weights):
        assert np.allclose(w1.conj().T, w2)


def test_convolve_power_examples(pauli):
    base = one_step_measure(pauli, 1)
    assert convolve_power(base, 1) is base
    two = convolve_power(base, 2)
    assert len(two) == 9
    assert sorted({tuple(p) for p in two.points}) == sorted(
        {(float(a), float(b)) for a in (-2, 0, 2) for b in (-2, 0, 2)}
    )
    w = np.array([[0.3, 0.1j], [-0.1j, 0.7]])
    single = MatrixAtomMeasure(np.array([[0.5, -1.0]]), w[None])
    cube = convolve_power(single, 3)
    assert cube.points.tolist() == [[1.5, -3.0]]
    assert np.allclose(cube.weights[0], w @ w @ w)


def test_convolve_power_ordering():
    # the accumulated weight is the left factor: weights at distinct atoms do not commute
    a = np.array([[1, 1], [0, 0]], dtype=complex)
    b = np.array([[0, 0], [1, 1]], dtype=complex)
    base = MatrixAtomMeasure(np.array([[0.0], [1.0]]), np.stack([a, b]))
    two = convolve_power(base, 2)
    assert np.allclose(two.weight_at([1.0]), a @ b + b @ a)
    three = convolve_power(base, 3)
    assert np.allclose(three.weight_at([1.0]), a @ a @ b + a @ b @ a + b @ a @ a)


def test_budget_guard(pauli, mixed2):
    with pytest.raises(AtomBudgetExceeded):
        mh_measure(pauli, mixed2, 10, budget=50)


def test_keep_lattice_retains_zero_atoms(pauli, mixed2):
    kept = mh_measure(pauli, mixed2, 5, keep_lattice=True)
    dropped = mh_measure(pauli, mixed2, 5)
    assert len(kept) == 36
    assert len(dropped) < 36
    assert measure_l1_distance(kept, dropped) <= 1e-12


def test_canonical_order_and_merge():
    mu = signed_measure([[1.0, 0.0], [0.0, 1.0], [1.0 + 1e-12, 0.0], [0.5, 0.5]], [0.2, 0.3, 0.1, 0.0])
    assert [tuple(p) for p in mu.points] == [(0.0, 1.0), (1.0, 0.0)]
    assert mu.weights.tolist() == pytest.approx([0.3, 0.3])


def test_measure_is_immutable(pauli, mixed2):
    mu = mh_measure(pauli, mixed2, 2)
    with pytest.raises(ValueError):
        mu.weights[0] = 1.0


def test_deterministic(pauli, tilted):
    a, b = mh_measure(pauli, tilted, 6), mh_measure(pauli, tilted, 6)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)


def test_order_guard(pauli, mixed2):
    with pytest.raises(ValidationError):
        mh_measure(pauli, mixed2, 0)
    with pytest.raises(DimMismatch):
        mh_measure(pauli, maximally_mixed(3), 1)


def test_spin4_high_order_mass():
    ops = spin_pair(4)
    rho = eigenstate(spin_operator(4, math.pi / 2, math.pi / 2), +1)
    mu = mh_measure(ops, rho, 6)
    assert abs(mu.total_mass() - 1) <= 1e-10
