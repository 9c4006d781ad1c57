"""Multiparameter variation/oscillation seminorms, Radon-type multipliers,
and polynomial ergodic averages on commuting torus flows."""

__version__ = "0.1.0"

from .lattice import (
    MonomialMap,
    ParamGrid,
    SampleFamily,
    evaluate_monomials,
    mixed_difference,
    normalize_exponent_matrix,
    precedes,
    scalar_dilate,
    shift,
    tensor_scale,
)
from .seminorms import (
    OscillationReport,
    VariationCertificate,
    oscillation,
    pointwise_max_bound_check,
    split_variation_1d,
    sup_oscillation,
    variation,
    variation_bruteforce,
    variation_points,
)
from .rademacher import (
    DyadicBlockFamily,
    rectangle_decomposition,
    rm_bound_1d,
    rm_bound_multi,
)
from .gluing import (
    GluingData,
    compatibility_check,
    compute_n0,
    cube,
    gluing_data,
    locate_box,
    rank_and_basis_rows,
    select_scale,
    split_variation_multi,
)
from .multipliers import (
    BumpProfile,
    DecayFit,
    PeriodicField,
    QuadratureSpec,
    apply_multiplier_periodic,
    box_difference_multiplier,
    bump_transform,
    cancellation_norm,
    decay_scan,
    error_multiplier,
    off_diagonal_constant,
    off_diagonal_profile,
    projected_multiplier,
    radon_multiplier,
)
from .dynamics import (
    TorusSystem,
    TrigPolynomial,
    convergence_experiment,
    ergodic_average_discrete,
    ergodic_average_quadrature,
    ergodic_average_spectral,
    lacunary_chain,
    oscillation_statistics,
    radon_average_grid,
)
