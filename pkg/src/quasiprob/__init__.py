"""Margenau-Hill and Wigner quasi-probability distributions for tuples of
Hermitian observables in finite dimension."""

from .constants import TOL, Tolerances
from .errors import *  # noqa: F401,F403
from .measure import (
    MatrixAtomMeasure,
    SignedDiscreteMeasure,
    convolve_power,
    marginal,
    measure_l1_distance,
    mh_measure,
    one_step_measure,
    signed_measure,
    spectral_marginal,
)
from .operators import (
    DensityMatrix,
    EigenLattice,
    HermitianOperator,
    Normalization,
    OperatorTuple,
    bloch_expectations,
    eigen_lattice,
    eigenstate,
    make_density,
    make_hermitian,
    maximally_mixed,
    pure_state,
    spin_operator,
)
from .qcf import QcfEvaluator, f_mh, f_w, sup_qcf_distance, supporting_function, trotter_error_bound
from .spin_half import (
    SpinHalfState,
    chebyshev_coeffs,
    de_moivre_residual,
    f_mh_spin_half,
    f_w_spin_half,
    h_factor,
    mehler_heine_residual,
    p_mh_spin_half,
)
from .wigner_reg import (
    GAUSSIAN,
    RAISED_COSINE,
    DensityGrid,
    GridSpec,
    joint_numerical_range_2d,
    mass_outside_disk,
    regularized_wigner,
    smear_measure,
)

__version__ = "0.1.0"
