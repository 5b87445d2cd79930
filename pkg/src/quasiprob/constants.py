"""Numerical thresholds shared across the package.

Every tolerance used for validation or canonicalization lives here so that
tests and runtime checks agree on a single value.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    trace: float = 1e-12
    psd: float = 1e-10
    reconstruction: float = 1e-10
    unitarity: float = 1e-10
    # eigenvalue snapping / atom merging, sup-norm
    lattice: float = 1e-9
    zero_weight: float = 1e-12
    # max |Im| tolerated before a signed weight is declared real
    imag_residue: float = 1e-8
    atom_budget: int = 10**7
    max_observables: int = 5


TOL = Tolerances()
