import itertools
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from quasiprob import OperatorTuple, QcfEvaluator, make_hermitian, maximally_mixed
from quasiprob.checks import random_density, random_hermitian
from quasiprob.figures import pauli_pair
from quasiprob.errors import DimMismatch, EmptyGrid, NonFinite, ValidationError
from quasiprob.qcf import f_mh, f_w, sup_qcf_distance, supporting_function, trotter_error_bound

coord = st.floats(-6, 6, allow_nan=False)


def naive_f_mh(mats, rho, m, z):
    """Direct definition with scipy's expm and explicit loops."""
    n = len(mats)
    total = 0
    perms = list(itertools.permutations(range(n)))
    for perm in perms:
        step = np.eye(rho.shape[0], dtype=complex)
        for k in perm:
            step = step @ scipy.linalg.expm(1j * z[k] * mats[k] / m)
        total += np.trace(rho @ np.linalg.matrix_power(step, m))
    return total / len(perms)


@pytest.fixture
def ev(pauli, mixed2):
    return QcfEvaluator(pauli, mixed2)


def test_origin_is_one(ev):
    assert f_w(ev, [0, 0]) == pytest.approx(1)
    for m in (1, 3, 7):
        assert f_mh(ev, m, [0, 0]) == pytest.approx(1)


def test_wigner_at_pi(ev):
    assert f_w(ev, [math.pi, 0]) == pytest.approx(-1, abs=1e-14)


def test_commuting_diagonal_closed_form():
    d = np.diag([1.0, -1.0])
    ev = QcfEvaluator(OperatorTuple.of(d, d), maximally_mixed(2))
    for a, b in [(0.3, 1.2), (-2.0, 0.5)]:
        assert f_w(ev, [a, b]) == pytest.approx(math.cos(a + b), abs=1e-14)
        assert f_mh(ev, 5, [a, b]) == pytest.approx(math.cos(a + b), abs=1e-12)


@given(coord, coord)
def test_first_order_is_product_of_cosines(a, b):
    ev = QcfEvaluator(pauli_pair(), maximally_mixed(2))
    assert abs(ev.f_mh(1, [a, b]) - math.cos(a) * math.cos(b)) <= 1e-12


def test_matches_naive_definition(rng):
    mats = [random_hermitian(rng, 3) for _ in range(3)]
    rho = random_density(rng, 3)
    ev = QcfEvaluator(OperatorTuple.of(*mats), rho)
    for m in (1, 2, 5):
        for z in (rng.normal(size=3), rng.normal(size=3) + 0.5j * rng.normal(size=3)):
            ref = naive_f_mh([a.entries for a in mats], rho.entries, m, z)
            assert ev.f_mh(m, z) == pytest.approx(ref, abs=1e-11)
    z = rng.normal(size=3) + 0.3j
    ref = np.trace(rho.entries @ scipy.linalg.expm(1j * sum(zk * a.entries for zk, a in zip(z, mats))))
    assert ev.f_w(z) == pytest.approx(ref, abs=1e-11)


@given(coord, coord, st.integers(1, 12))
def test_bounded_by_one(a, b, m):
    rng = np.random.default_rng(7)
    ev = QcfEvaluator(OperatorTuple.of(random_hermitian(rng, 3), random_hermitian(rng, 3)), random_density(rng, 3))
    assert abs(ev.f_mh(m, [a, b])) <= 1 + 1e-12


@given(coord, coord, st.integers(1, 12))
def test_conjugate_symmetry(a, b, m):
    rng = np.random.default_rng(8)
    ev = QcfEvaluator(OperatorTuple.of(random_hermitian(rng, 3), random_hermitian(rng, 3)), random_density(rng, 3))
    assert abs(np.conj(ev.f_mh(m, [a, b])) - ev.f_mh(m, [-a, -b])) <= 1e-12


@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=2, max_size=2), st.sampled_from([1, 2, 4]))
def test_paley_wiener_bound(z, m):
    rng = np.random.default_rng(9)
    ops = OperatorTuple.of(random_hermitian(rng, 3), random_hermitian(rng, 3))
    ev = QcfEvaluator(ops, random_density(rng, 3))
    z = np.array(z)
    assert abs(ev.f_mh(m, -z)) <= math.exp(supporting_function(ops, z.imag)) + 1e-9


def test_commuting_tuple_is_exact(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    a = make_hermitian(q @ np.diag([1.0, 2.0, -1.0]) @ q.T)
    b = make_hermitian(q @ np.diag([0.5, 0.5, 3.0]) @ q.T)
    ev = QcfEvaluator(OperatorTuple.of(a, b), random_density(rng, 3))
    grid = rng.uniform(-4, 4, size=(30, 2))
    for m in (1, 2, 9):
        assert sup_qcf_distance(ev, m, grid) <= 1e-12


def test_trotter_bound_examples(ev):
    assert trotter_error_bound(ev, [0, 0], 1) == pytest.approx(2 / math.sqrt(2))
    assert trotter_error_bound(ev, [1, 1], 10) == pytest.approx(0.2 / math.sqrt(2) * math.exp(2 * math.sqrt(2)))
    assert trotter_error_bound(ev, [0.7, -1], 8) == pytest.approx(trotter_error_bound(ev, [0.7, -1], 4) / 2)


def test_sup_distance_examples(ev):
    assert sup_qcf_distance(ev, 3, [[0, 0]]) == pytest.approx(0, abs=1e-12)
    axis = np.linspace(-math.pi, math.pi, 21)
    grid = np.array(list(itertools.product(axis, axis)))
    dists = [sup_qcf_distance(ev, m, grid) for m in (1, 2, 4, 8, 16)]
    assert all(b < a for a, b in zip(dists, dists[1:]))
    for m, dist in zip((1, 2, 4, 8, 16), dists):
        assert dist <= max(trotter_error_bound(ev, xi, m) for xi in grid)
    with pytest.raises(EmptyGrid):
        sup_qcf_distance(ev, 1, np.empty((0, 2)))


def test_supporting_function_vertices(pauli):
    assert supporting_function(pauli, [1, 1]) == pytest.approx(2)
    assert supporting_function(pauli, [-1, 0.5]) == pytest.approx(1.5)


def test_input_guards(ev, pauli):
    with pytest.raises(NonFinite):
        ev.f_w([np.inf, 0])
    with pytest.raises(DimMismatch):
        ev.f_w([1, 2, 3])
    with pytest.raises(ValidationError):
        ev.f_mh(0, [1, 2])
    with pytest.raises(DimMismatch):
        QcfEvaluator(pauli, maximally_mixed(3))
    six = OperatorTuple.of(*([np.eye(2)] * 6))
    with pytest.raises(ValidationError):
        QcfEvaluator(six, maximally_mixed(2))


def test_batch_matches_single(ev, rng):
    z = rng.normal(size=(10, 2))
    batch = ev.f_mh_many(4, z)
    assert np.allclose(batch, [ev.f_mh(4, row) for row in z], atol=1e-15)
