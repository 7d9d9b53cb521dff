"""Exact Cartan calculus, Dorfman brackets on TM + E*, and their lifts to TE + T*E."""

from .scalar import FourierPoly, Poly, ScalarError, parse_rational, rational
from .cartan import (
    CartanError,
    Form,
    Multivector,
    VectorValuedForm,
    exterior_d,
    interior,
    lie_bracket,
    lie_derivative,
    multi_contract,
    wedge,
)
from .bundle import AnchoredSection, BundleContext, BundleError, CoSection, Derivation, dual_derivation, pairing
from .brackets import BracketError, BracketSpec, catalog, jacobiator, twist
from .total_space import (
    GeneralizedSection,
    NotLinearError,
    courant_dorfman_total,
    decompose_linear,
    decompose_linear_kform,
    vertical_lift,
)
from .lift import LiftReport, build_lift, check_main2, check_natural, check_symmetry, check_twist, omni_bracket
from .sampling import SamplePlan

__version__ = "0.1.0"
