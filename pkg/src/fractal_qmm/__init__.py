"""Self-similar qubit-array coupling operator and its spectral calculus.

The package covers four layers: dyadic grids with the fast orthonormal Haar
transform; the coupling operator with its detail-block recurrence,
closed-form spectrum, Walsh-type eigenfunctions and unitary evolution; the
finite qubit-array matrices and linear potential they converge to; and the
closed-form phase-space rotation of a field conditioned on an array
eigenstate, with a semi-Lagrangian cross-check.
"""

from .bench import haar_block_nnz, run_bench, scaling_ratios
from .coupling import (
    EigenIndex,
    SignString,
    apply_c_grid,
    apply_exp_itc,
    b_transform,
    block_dn,
    dn_eigenvalues,
    eigen_index_from_value,
    eigen_relation_residual,
    eigenfunction,
    fast_apply_c,
    jn_matrix,
    jn_projection_check,
    restricted_matrix,
    sign_string_eigenvalue,
    spectral_diagonal,
)
from .dyadic import (
    HaarCoeffs,
    PiecewiseConstantFn,
    coeff_index,
    coeff_label,
    dyadic_digits,
    haar_basis_function,
    haar_forward,
    haar_inverse,
    max_level,
    scaling_function,
)
from .errors import ConsistencyError, DomainError
from .potential import (
    PotentialSpec,
    apply_potential,
    potential_haar_coefficient,
    rademacher_partial_sum,
)
from .qubits import (
    DiagonalOperator,
    SparseOperator,
    apply_ck,
    build_ck,
    build_vk,
    continuum_correspondence_check,
    unitary_equivalence_check,
)
from .wigner import (
    EvolutionParams,
    WignerGrid,
    center_set,
    characteristic_map,
    coherent_wigner,
    displaced_spectrum_check,
    evolve_closed_form,
    evolve_numeric,
    fit_circle,
)

__version__ = "0.1.0"
