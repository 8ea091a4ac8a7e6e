"""Symmetric Ekeland-Hofer-Zehnder capacities of convex bodies via Clarke duality."""
from .bodies import (
    Ball,
    Body,
    Ellipsoid,
    LagrangianProduct,
    LinearImage,
    PolytopeH,
    PolytopeV,
    PSum,
    Scale,
    SymplecticProduct,
    Translate,
    body_from_dict,
    geometric_summary,
)
from .billiards import BilliardTrajectory, ZetaReport, billiard_length, bouncing_ball_oracle, project_carrier, zeta
from .checks import CheckReport
from .dualsolver import CapacityResult, SolveConfig, SymmetricLoop, compute_capacity
from .errors import SymcapError
from .linsymp import Involution, normalize_involution, sym_williamson, validate_involution

__version__ = "0.1.0"
