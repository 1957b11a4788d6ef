"""Newton-polygon classification and Böttcher coordinates for polynomial
skew products ``f(z, w) = (p(z), q(z, w))`` near infinity."""

__version__ = "0.1.0"

from .bottcher import BottcherEval, chi, derived_coordinates, injectivity_region, phi, phi_extended, phi_n, psi, tail_bound
from .classify import INF, WeightPlan, analyze, classify, l1_star, select_plan, validate_weight
from .exceptions import (
    BranchAmbiguityError,
    ConvergenceError,
    HypothesisError,
    InvalidMapError,
    ParseError,
    RemainderOverflowError,
    SkewfoldError,
)
from .infinity import (
    VFamily,
    afo_region,
    classify_infinity,
    classify_weighted,
    critical_precondition,
    preimage_region,
)
from .newton import NewtonPolygon, newton_polygon
from .poly import LogPoint, Polynomial, SkewProduct, evaluate, parse_map, parse_polynomial
from .region import RegionSpec, estimate_R, member, verify_bounds, verify_contraction, verify_invariance
from .transforms import MonomialSubstitution, pushforward, verify_normal_form

__all__ = [
    "BottcherEval",
    "BranchAmbiguityError",
    "ConvergenceError",
    "HypothesisError",
    "INF",
    "InvalidMapError",
    "LogPoint",
    "MonomialSubstitution",
    "NewtonPolygon",
    "ParseError",
    "Polynomial",
    "RegionSpec",
    "RemainderOverflowError",
    "SkewProduct",
    "SkewfoldError",
    "VFamily",
    "WeightPlan",
    "afo_region",
    "analyze",
    "chi",
    "classify",
    "classify_infinity",
    "classify_weighted",
    "critical_precondition",
    "derived_coordinates",
    "estimate_R",
    "evaluate",
    "injectivity_region",
    "l1_star",
    "member",
    "newton_polygon",
    "parse_map",
    "parse_polynomial",
    "phi",
    "phi_extended",
    "phi_n",
    "preimage_region",
    "psi",
    "pushforward",
    "select_plan",
    "tail_bound",
    "validate_weight",
    "verify_bounds",
    "verify_contraction",
    "verify_invariance",
    "verify_normal_form",
]
