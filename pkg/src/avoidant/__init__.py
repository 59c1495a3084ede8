"""Polynomial approximation on compact plane sets that avoids prescribed values."""

from .avoid_countable import avoid_set, check_cauchy
from .avoid_one import avoid_value
from .compact import (CompactSetSample, DiscSpec, from_config, make_arc, make_circle, make_disc_union,
                      make_fat_cantor_product)
from .errors import AvoidanceError, AvoidantError, PipelineError
from .forbidden import ForbiddenSet, algebraic_numbers, explicit_set, gaussian_rationals, truncate_to_reach
from .mergelyan import FunctionEvaluator, approximate_poly, exp_function, sample_table
from .obstruction import build_gamma, demo_obstruction, winding_number
from .pipeline import ApproximationProblem, PipelineReport, corollary_transcendental, estimate_delta, run
from .poly import Polynomial, from_roots, roots

__version__ = "0.1.0"

__all__ = [
    "ApproximationProblem", "AvoidanceError", "AvoidantError", "CompactSetSample", "DiscSpec",
    "ForbiddenSet", "FunctionEvaluator", "PipelineError", "PipelineReport", "Polynomial",
    "algebraic_numbers", "approximate_poly", "avoid_set", "avoid_value", "build_gamma",
    "check_cauchy", "corollary_transcendental", "demo_obstruction", "estimate_delta",
    "exp_function", "explicit_set", "from_config", "from_roots", "gaussian_rationals",
    "make_arc", "make_circle", "make_disc_union", "make_fat_cantor_product", "roots", "run",
    "sample_table", "truncate_to_reach", "winding_number",
]
