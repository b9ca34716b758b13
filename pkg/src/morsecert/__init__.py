"""Geometry and certification toolkit for free-group actions on the space
of unimodular positive definite symmetric matrices."""

from .cartan import (
    CartanVector,
    FaceType,
    GroupElement,
    Point,
    ThetaSet,
    cartan_vector,
    identity_point,
    iota,
    regularity_margin,
    riemannian_distance,
    theta_contains,
)
from .cones import (
    ParallelSetSpec,
    angle_distance_surrogate,
    in_diamond,
    in_theta_cone,
    membership_residual,
    parallel_set,
    project_to_parallel_set,
)
from .dynamics import (
    contraction_diagnostic,
    expansion_factor,
    expansion_report,
    flag_differential,
    transvection_spectrum,
)
from .errors import (
    DegenerateSegment,
    DegenerateVector,
    FaceMismatch,
    InputError,
    MorsecertError,
    NearSingularMargin,
    NoConvergence,
    NotASubface,
    NotIotaInvariant,
    NotOpposite,
    NotPositiveDefinite,
    NotThetaRegular,
    NumericalBlowup,
    PathTooShort,
    PowerStabilizationFailed,
    SchemaError,
)
from .flags import (
    Flag,
    ZetaType,
    angle_zeta,
    angle_zeta_point,
    apply_to_flag,
    canonical_zeta,
    face_of,
    flag_distance,
    flag_shadow,
    group_shadow,
    is_opposite,
    standard_flag,
    zeta_direction,
)
from .morse import (
    Certificate,
    CheckReport,
    NotCertified,
    OrbitPath,
    StraightnessParams,
    certify_action,
    check_path_morse,
    default_schedule,
    is_straight,
    midpoint,
    midpoint_triples,
    morse_lemma_fit,
    quadruple_check,
)
from .repio import (
    RepresentationInput,
    load_representation,
    orbit_path,
    reduced_words,
    save_report,
    word_count,
)
from .schottky import (
    antipodality_audit,
    genericity_check,
    limit_set_sample,
    power_search,
    quadruple_geometry,
)

__version__ = "0.1.0"
