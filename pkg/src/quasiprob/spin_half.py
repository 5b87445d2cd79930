"""Closed forms for a pair of orthogonal spin-1/2 observables (Pauli units).

For S_1 = S.n_1, S_2 = S.n_2 with n_1 . n_2 = 0 and s_k = tr(rho S_k):

    f_MH_m(xi) = T_m(c) + i (s_1 sin(xi_1/m) cos(xi_2/m) + s_2 cos(xi_1/m) sin(xi_2/m)) U_{m-1}(c)
    c          = cos(xi_1/m) cos(xi_2/m)
    f_W(xi)    = cos|xi| + i (s . xi) sin|xi| / |xi|

and p_MH_m is the Chebyshev-coefficient lattice measure tilted by
(1 + s_1 x_1 + s_2 x_2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegreeTooLarge, OverflowGuard, ValidationError
from .measure import SignedDiscreteMeasure, signed_measure
from .operators import (
    DensityMatrix,
    HermitianOperator,
    Normalization,
    bloch_expectations,
    direction,
    spin_operator,
)

__all__ = [
    "MAX_DEGREE",
    "ChebyshevCoeffs",
    "SpinHalfState",
    "chebyshev_coeffs",
    "chebyshev_t",
    "chebyshev_u",
    "f_mh_spin_half",
    "p_mh_spin_half",
    "de_moivre_residual",
    "mehler_heine_residual",
    "mehler_heine_jacobi_residual",
    "jacobi_prefactor",
    "f_w_spin_half",
    "h_factor",
]

MAX_DEGREE = 60
MAX_MEHLER_HEINE_ORDER = 10**6


@dataclass(frozen=True)
class ChebyshevCoeffs:
    """Monomial coefficients of T_m: T_m(x) = sum_n coeffs[n] x^n."""

    m: int
    coeffs: tuple

    def integers(self) -> list:
        return [int(c) for c in self.coeffs]

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, np.asarray(self.coeffs, dtype=float))


def _integer_cheb(m: int) -> list:
    if m < 0:
        raise ValidationError("degree must be non-negative")
    if m > MAX_DEGREE:
        raise DegreeTooLarge(f"degree {m} exceeds {MAX_DEGREE}; coefficients lose exactness in double precision")
    prev, cur = [1], [0, 1]
    if m == 0:
        return prev
    for _ in range(m - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return cur


def chebyshev_coeffs(m: int) -> ChebyshevCoeffs:
    return ChebyshevCoeffs(int(m), tuple(float(c) for c in _integer_cheb(int(m))))


def chebyshev_t(x, m: int):
    """T_m(x); uses cos(m arccos x) on real [-1, 1] and the three-term
    recurrence elsewhere (complex or |x| > 1)."""
    x = np.asarray(x)
    if m < 0:
        raise ValidationError("degree must be non-negative")
    if not np.iscomplexobj(x) and np.all(np.abs(x) <= 1):
        return np.cos(m * np.arccos(x))
    t0, t1 = np.ones_like(x, dtype=complex if np.iscomplexobj(x) else float), x
    if m == 0:
        return t0
    for _ in range(m - 1):
        t0, t1 = t1, 2 * x * t1 - t0
    return t1


def chebyshev_u(x, m: int):
    """U_m(x) by recurrence; U_{-1} = 0."""
    x = np.asarray(x)
    dtype = complex if np.iscomplexobj(x) else float
    if m < 0:
        return np.zeros_like(x, dtype=dtype)
    u0, u1 = np.ones_like(x, dtype=dtype), 2 * x
    if m == 0:
        return u0
    for _ in range(m - 1):
        u0, u1 = u1, 2 * x * u1 - u0
    return u1


@dataclass(frozen=True)
class SpinHalfState:
    """In-plane Bloch components s_k = tr(rho S_k) of a spin-1/2 state."""

    s1: float
    s2: float

    def __post_init__(self):
        if self.s1 ** 2 + self.s2 ** 2 > 1 + 1e-12:
            raise ValidationError(f"(s1, s2) = ({self.s1}, {self.s2}) lies outside the unit disk")

    @classmethod
    def from_density(cls, rho: DensityMatrix, s1_op: HermitianOperator, s2_op: HermitianOperator):
        s = bloch_expectations(rho, [s1_op, s2_op])
        return cls(float(s[0]), float(s[1]))


def _check_order(m):
    if int(m) != m or m < 1:
        raise ValidationError(f"order m must be a positive integer, got {m!r}")
    return int(m)


def f_mh_spin_half(state: SpinHalfState, m: int, xi):
    m = _check_order(m)
    xi = np.asarray(xi, dtype=complex)
    a, b = xi[..., 0] / m, xi[..., 1] / m
    if np.all(xi.imag == 0):
        a, b = a.real, b.real
    c = np.cos(a) * np.cos(b)
    tilt = state.s1 * np.sin(a) * np.cos(b) + state.s2 * np.cos(a) * np.sin(b)
    return chebyshev_t(c, m) + 1j * tilt * chebyshev_u(c, m - 1)


def p_mh_spin_half(state: SpinHalfState, m: int, *, keep_lattice: bool = False) -> SignedDiscreteMeasure:
    """p_MH_m from Chebyshev coefficients, weights computed in exact integers.

    The untilted weight at ((m-2i)/m, (m-2k)/m) equals
    4^-m sum_n a_mn 4^(m-n) C(n,p) C(n,q) with n - 2p = m - 2i etc.
    """
    m = _check_order(m)
    a = _integer_cheb(m)
    num = [[0] * (m + 1) for _ in range(m + 1)]
    for n, amn in enumerate(a):
        if amn == 0:
            continue
        scale = amn * 4 ** (m - n)
        binoms = [math.comb(n, p) for p in range(n + 1)]
        for p in range(n + 1):
            i = (n - 2 * p + m) // 2
            for q in range(n + 1):
                k = (n - 2 * q + m) // 2
                num[i][k] += scale * binoms[p] * binoms[q]
    den = 4 ** m
    coords = np.array([(2 * i - m) / m for i in range(m + 1)])
    pts, wts = [], []
    for i in range(m + 1):
        for k in range(m + 1):
            x1, x2 = coords[i], coords[k]
            w0 = num[i][k] / den
            pts.append((x1, x2))
            wts.append((1.0 + state.s1 * x1 + state.s2 * x2) * w0)
    meta = {"m": m, "labels": ["S1", "S2"], "keep_lattice": keep_lattice, "s": [state.s1, state.s2]}
    return signed_measure(np.array(pts), np.array(wts), meta, keep_zero=keep_lattice)


def _pauli_pair(directions):
    if directions is None:
        directions = ((np.pi / 2, 0.0), (np.pi / 2, np.pi / 2))
    (t1, p1), (t2, p2) = directions
    if abs(np.dot(direction(t1, p1), direction(t2, p2))) > 1e-12:
        raise ValidationError("the closed forms require orthogonal directions")
    return (
        spin_operator(0.5, t1, p1, Normalization.PAULI),
        spin_operator(0.5, t2, p2, Normalization.PAULI),
    )


def de_moivre_residual(xi1: float, xi2: float, m: int, directions=None) -> float:
    """Frobenius residual of the two non-commutative de Moivre identities.

    (i)  [(E1 E2)^m + (E2 E1)^m] / 2 = T_m(a) I + i b U_{m-1}(a)
    (ii) [(E1 E2)^m - (E2 E1)^m] / 2 = U_{m-1}(a) sin(xi1/m) sin(xi2/m) S2 S1

    with E_k = exp(i xi_k S_k / m), a = cos(xi1/m) cos(xi2/m) and
    b = sin(xi1/m) cos(xi2/m) S1 + cos(xi1/m) sin(xi2/m) S2.  Returns the
    larger of the two residuals.
    """
    m = _check_order(m)
    s1, s2 = _pauli_pair(directions)
    t1, t2 = xi1 / m, xi2 / m
    eye = np.eye(2)
    # Pauli-type operators square to the identity, so exp(i t S) = cos t + i sin t S
    e1 = math.cos(t1) * eye + 1j * math.sin(t1) * s1.entries
    e2 = math.cos(t2) * eye + 1j * math.sin(t2) * s2.entries
    p12 = np.linalg.matrix_power(e1 @ e2, m)
    p21 = np.linalg.matrix_power(e2 @ e1, m)
    a = math.cos(t1) * math.cos(t2)
    b = math.sin(t1) * math.cos(t2) * s1.entries + math.cos(t1) * math.sin(t2) * s2.entries
    tm = float(chebyshev_t(a, m))
    um1 = float(chebyshev_u(a, m - 1))
    r1 = np.linalg.norm((p12 + p21) / 2 - (tm * eye + 1j * um1 * b))
    r2 = np.linalg.norm((p12 - p21) / 2 - um1 * math.sin(t1) * math.sin(t2) * (s2.entries @ s1.entries))
    return float(max(r1, r2))


def _t_of_cos_product(z1, z2, m):
    # T_m(cos(z1/m) cos(z2/m)) = cos(m theta) with 1 - cos(theta) computed
    # without cancellation
    a, b = z1 / m, z2 / m
    delta = 2 * np.sin(a / 2) ** 2 + np.cos(a) * 2 * np.sin(b / 2) ** 2
    theta = 2 * np.arcsin(np.sqrt(delta / 2))
    return np.cos(m * theta)


def _mh_inputs(z1, z2, m):
    m = _check_order(m)
    if m > MAX_MEHLER_HEINE_ORDER:
        raise OverflowGuard(f"m = {m} exceeds {MAX_MEHLER_HEINE_ORDER}")
    z1, z2 = complex(z1), complex(z2)
    if z1.imag == 0 and z2.imag == 0:
        return z1.real, z2.real, m
    return np.complex128(z1), np.complex128(z2), m


def _limit(z1, z2):
    return np.cos(np.sqrt(np.asarray(z1 * z1 + z2 * z2, dtype=complex)))


def mehler_heine_residual(z1, z2, m: int) -> float:
    """|T_m(cos(z1/m) cos(z2/m)) - cos(sqrt(z1^2 + z2^2))| (principal root)."""
    z1, z2, m = _mh_inputs(z1, z2, m)
    return float(abs(_t_of_cos_product(z1, z2, m) - _limit(z1, z2)))


def jacobi_prefactor(m: int) -> float:
    """sqrt(m pi) (2m)! / (2^{2m} (m!)^2), evaluated through log-gamma."""
    m = _check_order(m)
    log = 0.5 * math.log(m * math.pi) + math.lgamma(2 * m + 1) - 2 * m * math.log(2) - 2 * math.lgamma(m + 1)
    return math.exp(log)


def mehler_heine_jacobi_residual(z1, z2, m: int) -> float:
    """Residual of the Jacobi (alpha = beta = -1/2) form, prefactor included."""
    z1, z2, m = _mh_inputs(z1, z2, m)
    return float(abs(jacobi_prefactor(m) * _t_of_cos_product(z1, z2, m) - _limit(z1, z2)))


def f_w_spin_half(state: SpinHalfState, xi):
    xi = np.asarray(xi, dtype=float)
    r = np.hypot(xi[..., 0], xi[..., 1])
    # np.sinc(x) = sin(pi x) / (pi x), finite at 0
    sinc = np.sinc(r / np.pi)
    return np.cos(r) + 1j * (state.s1 * xi[..., 0] + state.s2 * xi[..., 1]) * sinc


def h_factor(state: SpinHalfState, r, theta):
    """Tilt 1 + s1 r cos(theta) + s2 r sin(theta) relating p_W to its untilted part."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValidationError("radius must be non-negative")
    return 1.0 + state.s1 * r * np.cos(theta) + state.s2 * r * np.sin(theta)
