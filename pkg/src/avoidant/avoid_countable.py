"""Avoid a whole finite list of values by chaining single-value steps.

Step ``j`` perturbs the previous iterate within half of the previous budget,
records the boundary margin ``delta_j`` it achieved, and sets the next budget
``eps_j = min(delta_j, SHRINK * eps_{j-1}) / 2``.  ``SHRINK`` sits just below
1, which keeps ``eps_j`` strictly under ``eps_{j-1} / 2`` without quartering
the budget at every step.  Step ``k`` changes the polynomial by less than
``eps_{k-1} / 2``, so everything after step ``j`` adds up to less than
``eps_j <= delta_j / 2``: later steps can neither undo an earlier margin nor
add up to more than ``eps_0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .avoid_one import avoid_value, margin_certified
from .compact import CompactSetSample
from .errors import AvoidanceError
from .forbidden import ForbiddenSet
from .poly import Polynomial, horner

DELTA_FLOOR = 1e-13
_TINY = 1e-290
SHRINK = 1 - 2.0**-10


@dataclass
class AvoidanceReport:
    """Outcome of :func:`avoid_set`.

    ``eps_schedule`` holds ``eps_0 .. eps_N``; ``deltas``, ``final_margins``
    and ``step_certified`` are indexed by step ``1 .. N`` (list position
    ``j - 1``).
    """

    p: Polynomial
    values: tuple[complex, ...]
    deltas: list[float]
    eps_schedule: list[float]
    final_margins: list[float]
    step_certified: list[bool]
    step_moved: list[int]
    certified: bool
    total_sup_change: float
    eps: float
    leading_abs: float
    iterates_kept: list[Polynomial] | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        out = {
            "p": self.p.to_json(),
            "values": [[v.real, v.imag] for v in self.values],
            "deltas": self.deltas,
            "eps_schedule": self.eps_schedule,
            "final_margins": self.final_margins,
            "step_certified": self.step_certified,
            "step_moved_roots": self.step_moved,
            "certified": self.certified,
            "total_sup_change": self.total_sup_change,
            "eps": self.eps,
            "leading_abs": self.leading_abs,
        }
        if self.iterates_kept is not None:
            out["iterates"] = [q.to_json() for q in self.iterates_kept]
        return out


def avoid_set(q: Polynomial, A: ForbiddenSet, K: CompactSetSample, eps: float,
              keep_iterates: bool = False) -> AvoidanceReport:
    """Polynomial within ``eps / 2`` of ``q`` on ``K`` that avoids every value of ``A`` on the boundary."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    bpts = K.boundary_points
    pts = K.all_points
    eps_prev = eps / 2
    schedule = [eps_prev]
    deltas, certs, moved = [], [], []
    p = q
    iterates = [q] if keep_iterates else None
    values = tuple(A.values)
    for j, a in enumerate(values, start=1):
        try:
            step = avoid_value(p, a, K, eps_prev / 2)
        except AvoidanceError as exc:
            raise AvoidanceError(str(exc), step=j) from exc
        p = step.q
        delta = step.margin
        if delta <= DELTA_FLOOR * max(1.0, abs(a)):
            raise AvoidanceError(
                f"margin {delta:.3e} at value {a} is below the floor; refine the mesh", step=j
            )
        eps_prev = 0.5 * min(delta, SHRINK * eps_prev)
        if eps_prev / 2 < _TINY and j < len(values):
            raise AvoidanceError(
                f"budget exhausted after {j} of {len(values)} values; truncate or reorder A", step=j
            )
        schedule.append(eps_prev)
        deltas.append(delta)
        certs.append(step.certified)
        moved.append(len(step.perturbed_roots))
        if keep_iterates:
            iterates.append(p)

    pb = horner(p.coeffs, bpts)
    margins = [float(np.min(np.abs(pb - a))) for a in values]
    certified = all(margin_certified(p, a, bpts, K.boundary_mesh, m) for a, m in zip(values, margins))
    total = float(np.max(np.abs(horner((p - q).coeffs, pts))))
    return AvoidanceReport(
        p=p,
        values=values,
        deltas=deltas,
        eps_schedule=schedule,
        final_margins=margins,
        step_certified=certs,
        step_moved=moved,
        certified=certified,
        total_sup_change=total,
        eps=eps,
        leading_abs=abs(p.leading),
        iterates_kept=iterates,
    )


def check_cauchy(iterates: list[Polynomial], eps_schedule: list[float], K: CompactSetSample) -> bool:
    """``sup_K |p_l - p_k| < eps_k`` for every pair ``k < l``."""
    if len(iterates) > len(eps_schedule):
        raise ValueError("need one budget per iterate")
    pts = K.all_points
    vals = [horner(p.coeffs, pts) for p in iterates]
    for k in range(len(vals)):
        for l in range(k + 1, len(vals)):
            if not float(np.max(np.abs(vals[l] - vals[k]))) < eps_schedule[k]:
                return False
    return True
