"""Mirror curves of toric Calabi-Yau threefolds: spines, amoebas and real points."""

from .amoeba import (
    AmoebaRaster,
    Membership,
    TooCloseToAmoebaError,
    amoeba_membership,
    component_degree,
    dominance_certificate,
    order_map_surjectivity,
    raster_amoeba,
    ronkin_value,
)
from .estimators import AmoebaClassifier, RonkinTransformer, SpineEstimator
from .fanio import FanFile, FanFileError, dumps_fan, loads_fan, parse_fan_file
from .lattice import (
    Flag,
    LatticePoint,
    Triangulation,
    check_dual_subdivision,
    enumerate_flags,
    flag_coordinate_bound,
    genus,
    regular_triangulation,
    validate_triangulation,
)
from .mirror import (
    DomainError,
    MirrorPolynomial,
    PreconditionError,
    QValue,
    RegimeError,
    build_mirror_polynomial,
    change_flag,
    check_regime,
    evaluate,
    polynomial_from_terms,
    suggest_q,
)
from .realcurve import (
    axis_restriction,
    axis_root_localization,
    count_real_components,
    cyclic_m_check,
    find_domain_components,
    pants_decomposition,
    quadrant_of_domain_component,
    trace_boundary_arcs,
    two_to_one_check,
)
from .render import render_svg, write_pgm
from .tropical import (
    TropicalCurve,
    TropicalPolynomial,
    balancing_check,
    dual_check,
    spine_coefficients,
    tropical_hypersurface,
    tropical_polynomial,
)

__version__ = "0.1.0"
