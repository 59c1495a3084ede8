"""End-to-end approximation with value avoidance.

``theorem1_discs`` mode handles finite unions of disjoint closed discs:
rescale ``f`` into each disc (error ``eps/3``), extend to all samples,
measure how far the result stays from ``A`` on the interior (``delta``), fit a
polynomial within ``min(eps/3, delta/2)`` and finally perturb it off ``A``
within the same budget.  ``theorem2_empty_interior`` mode is the same without
the rescale and ``delta`` stages, splitting ``eps`` in two halves.

Every run ends by measuring ``|f - p|`` and ``|p - a|`` on all samples; a
failed measurement raises instead of producing an optimistic report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .avoid_countable import AvoidanceReport, avoid_set
from .avoid_one import margin_certified
from .compact import CompactSetSample
from .errors import AvoidantError, PipelineError
from .forbidden import ForbiddenSet, algebraic_numbers, truncate_to_reach
from .mergelyan import (DEFAULT_MAX_DEGREE, FunctionEvaluator, approximate_poly,
                        disc_rescale, extend_to_K)
from .poly import Polynomial, horner, roots

SCHEMA = "avoidant-approx/1"
MODES = ("theorem1_discs", "theorem2_empty_interior")
# a root of p - a closer than this (relative) to K is treated as touching it
ROOT_EXCLUSION_TOL = 1e-9


@dataclass(frozen=True)
class ApproximationProblem:
    f: FunctionEvaluator
    K: CompactSetSample
    A: ForbiddenSet
    eps: float
    mode: str = "theorem1_discs"

    def __post_init__(self):
        if not self.eps > 0:
            raise PipelineError("validate", "eps must be positive")
        if self.mode not in MODES:
            raise PipelineError("validate", f"unknown mode {self.mode!r}")
        K = self.K
        if self.mode == "theorem1_discs":
            if not K.discs:
                raise PipelineError("validate", "theorem1_discs mode needs a disc-union set")
            if not K.has_interior:
                raise PipelineError("validate", "theorem1_discs mode needs interior samples")
            if len(K.discs) > 1 and not K.component_separation > 0 and not K.tangent:
                raise PipelineError("validate", "disc components must be separated")
        elif K.has_interior:
            raise PipelineError("validate", "theorem2_empty_interior mode needs a set without interior samples")

    @property
    def open_question_fixture(self) -> bool:
        """Tangent discs: the method carries no guarantee, so failures are inconclusive."""
        return self.mode == "theorem1_discs" and self.K.tangent


@dataclass
class PipelineReport:
    mode: str
    eps: float
    g_error: float
    delta: float | None
    budget: float
    q_error: float
    q_degree: int
    avoid_report: AvoidanceReport
    forbidden: ForbiddenSet
    avoided: ForbiddenSet
    final_sup_error: float
    final_min_margins: list[float]
    certified: bool
    margins_certified: bool
    roots_excluded: bool
    rescale_xi: tuple[float, ...] = ()
    dense_factor: int = 1
    dense_sup_error: float | None = None
    dense_min_margins: list[float] | None = None
    open_question_fixture: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def p(self) -> Polynomial:
        return self.avoid_report.p

    def to_json(self, keep_iterates: bool = False) -> dict:
        avoid = self.avoid_report.to_json()
        if not keep_iterates:
            avoid.pop("iterates", None)
        return {
            "schema": SCHEMA,
            "mode": self.mode,
            "eps": self.eps,
            "budgets": {
                "rescale": self.eps / 3 if self.mode == "theorem1_discs" else None,
                "approximation": self.budget,
                "avoidance": self.budget,
            },
            "g_error": self.g_error,
            "delta": self.delta,
            "rescale_xi": list(self.rescale_xi),
            "q_error": self.q_error,
            "q_degree": self.q_degree,
            "p": self.p.to_json(),
            "p_degree": self.p.degree,
            "forbidden": self.forbidden.to_json(),
            "avoided": self.avoided.to_json(),
            "avoid_report": avoid,
            "final_sup_error": self.final_sup_error,
            "final_min_margins": self.final_min_margins,
            "certified": self.certified,
            "margins_certified": self.margins_certified,
            "roots_excluded": self.roots_excluded,
            "dense_factor": self.dense_factor,
            "dense_sup_error": self.dense_sup_error,
            "dense_min_margins": self.dense_min_margins,
            "open_question_fixture": self.open_question_fixture,
            "notes": self.notes,
        }


def _continuity_slack(values: np.ndarray, points: np.ndarray, radius: float) -> float:
    """Largest change of the sampled function between samples closer than ``radius``."""
    if points.size < 2:
        return 0.0
    tree = cKDTree(np.column_stack([points.real, points.imag]))
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if pairs.size == 0:
        return 0.0
    return float(np.max(np.abs(values[pairs[:, 0]] - values[pairs[:, 1]])))


def estimate_delta(g: FunctionEvaluator, K: CompactSetSample, A: ForbiddenSet) -> float:
    """Lower estimate of ``min |g(z) - a|`` over the closure of the interior of ``K``.

    The sampled minimum is reduced by the largest variation of ``g`` between
    neighbouring samples (within twice the mesh), which bounds how much the
    true minimum can hide between samples.  Returns ``inf`` for empty ``A``.
    """
    mask = K.in_closure_interior
    if not mask.any():
        raise AvoidantError("K has no interior samples")
    if len(A) == 0:
        return math.inf
    z = K.all_points[mask]
    gv = g.on(K)[mask]
    if np.isnan(gv).any():
        raise AvoidantError("g is undefined on part of the closure of the interior")
    raw = min(float(np.min(np.abs(gv - a))) for a in A.values)
    slack = _continuity_slack(gv, z, 2 * K.mesh)
    delta = raw - slack
    if not delta > 0:
        raise AvoidantError(
            f"sampled distance {raw:.3e} to A does not exceed the continuity slack {slack:.3e}; "
            "f takes a forbidden value on the interior or the sampling is too coarse"
        )
    return delta


def roots_excluded(p: Polynomial, values, K: CompactSetSample) -> bool:
    """True if no root of ``p - a`` lies on the exact set behind ``K``, for every ``a``."""
    scale = max(1.0, K.diameter)
    for a in values:
        h = p - a
        if h.is_zero():
            return False
        if h.degree == 0:
            continue
        r = np.asarray(roots(h).roots)
        if np.any(K.exact_distance(r) <= ROOT_EXCLUSION_TOL * scale):
            return False
    return True


def _measure(p: Polynomial, fv: np.ndarray, points: np.ndarray, values) -> tuple[float, list[float]]:
    pv = horner(p.coeffs, points)
    err = float(np.max(np.abs(pv - fv)))
    margins = [float(np.min(np.abs(pv - a))) for a in values]
    return err, margins


def _stage(name: str, fn, *args, inconclusive: bool = False, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except (AvoidantError, ValueError, ArithmeticError) as exc:
        raise PipelineError(name, str(exc), inconclusive) from exc


def run(problem: ApproximationProblem, *, max_degree: int = DEFAULT_MAX_DEGREE,
        dense_factor: int = 1, keep_iterates: bool = False) -> tuple[Polynomial, PipelineReport]:
    """Build ``p`` with ``sup_K |f - p| < eps`` and ``p(z)`` outside ``A`` on ``K``."""
    f, K, A, eps = problem.f, problem.K, problem.A, problem.eps
    fuzzy = problem.open_question_fixture
    notes = []
    if fuzzy:
        notes.append("tangent discs: no guarantee, failures are inconclusive")
    fv = _stage("evaluate", f.on, K, inconclusive=fuzzy)
    if np.isnan(fv).any():
        raise PipelineError("evaluate", "f is undefined on some samples")

    xi: tuple[float, ...] = ()
    delta = None
    if problem.mode == "theorem1_discs":
        if f.kind == "polynomial":
            # already analytic across the boundary: nothing to rescale
            g, gv, g_error = f, fv, 0.0
            notes.append("f is a polynomial; rescaling skipped")
        else:
            g, params = _stage("disc_rescale", disc_rescale, f, K.discs, K, eps / 3, inconclusive=fuzzy)
            xi = params.xi_per_component
            g = _stage("extend", extend_to_K, g, K, f, inconclusive=fuzzy)
            gv = g.on(K)
            g_error = float(np.max(np.abs(gv - fv)))
        delta = _stage("estimate_delta", estimate_delta, g, K, A, inconclusive=fuzzy)
        budget = min(eps / 3, delta / 2)
    else:
        g, gv, g_error = f, fv, 0.0
        budget = eps / 2

    reach = float(np.max(np.abs(gv))) + eps
    avoided = truncate_to_reach(A, reach, slack=eps)
    q = _stage("approximate", approximate_poly, g, K, budget, max_degree, inconclusive=fuzzy)
    q_error = float(np.max(np.abs(horner(q.coeffs, K.all_points) - gv)))
    avoid = _stage("avoid_set", avoid_set, q, avoided, K, budget, keep_iterates, inconclusive=fuzzy)
    p = avoid.p

    values = tuple(A.values)
    err, margins = _measure(p, fv, K.all_points, values)
    if not err < eps:
        raise PipelineError("verify", f"measured sup|f - p| = {err:.3e} is not below eps = {eps:.3e}", fuzzy)
    if margins and not min(margins) > 0:
        raise PipelineError("verify", "p takes a forbidden value at a sample", fuzzy)
    lip = all(margin_certified(p, a, K.all_points, K.mesh, m) for a, m in zip(values, margins))
    excluded = roots_excluded(p, values, K)

    dense_err = dense_margins = None
    if dense_factor > 1:
        Kd = _stage("dense_verify", K.refine, dense_factor)
        fd = np.asarray(f(Kd.all_points), dtype=np.complex128) if f.evaluable_anywhere else None
        pv = horner(p.coeffs, Kd.all_points)
        dense_margins = [float(np.min(np.abs(pv - a))) for a in values]
        if fd is not None:
            dense_err = float(np.max(np.abs(pv - fd)))
            if not dense_err < eps:
                raise PipelineError("dense_verify", f"sup|f - p| = {dense_err:.3e} at density x{dense_factor}", fuzzy)
        else:
            notes.append("f is a sample table; dense check covers margins only")
        if dense_margins and not min(dense_margins) > 0:
            raise PipelineError("dense_verify", f"p takes a forbidden value at density x{dense_factor}", fuzzy)

    report = PipelineReport(
        mode=problem.mode,
        eps=eps,
        g_error=g_error,
        delta=delta,
        budget=budget,
        q_error=q_error,
        q_degree=q.degree,
        avoid_report=avoid,
        forbidden=A,
        avoided=avoided,
        final_sup_error=err,
        final_min_margins=margins,
        certified=True,
        margins_certified=lip,
        roots_excluded=excluded,
        rescale_xi=xi,
        dense_factor=dense_factor,
        dense_sup_error=dense_err,
        dense_min_margins=dense_margins,
        open_question_fixture=fuzzy,
        notes=notes,
    )
    return p, report


def corollary_transcendental(f: FunctionEvaluator, K: CompactSetSample, eps: float,
                             max_degree: int, max_height: int, **kwargs) -> tuple[Polynomial, PipelineReport]:
    """Approximate ``f`` on an empty-interior ``K`` while avoiding every enumerated algebraic number.

    Only algebraic numbers of degree at most ``max_degree`` and height at most
    ``max_height`` that a polynomial within ``eps`` of ``f`` could reach are
    avoided; the report's ``forbidden`` entry names this truncation.
    """
    fv = _stage("evaluate", f.on, K)
    reach = float(np.max(np.abs(fv))) + 2 * eps
    box = (-reach, reach, -reach, reach)
    A = _stage("enumerate", algebraic_numbers, max_degree, max_height, box)
    A = truncate_to_reach(A, reach)
    problem = ApproximationProblem(f, K, A, eps, "theorem2_empty_interior")
    return run(problem, **kwargs)
