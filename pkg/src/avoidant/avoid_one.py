"""Move the roots of ``p - a`` off the boundary of ``K`` without changing the degree.

Roots of ``g = p - a`` that sit within the activation distance of a boundary
sample are pushed a distance ``eta`` away from the boundary.  ``eta`` starts
from a first-order estimate of what the budget allows and is halved until the
measured change is within budget, so the accepted step is the largest one on
the halving ladder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compact import CompactSetSample
from .errors import AvoidanceError
from .poly import (Polynomial, derivative_sup_bound, from_roots, horner,
                   local_variation_bound, roots)

ACTIVATION_FACTOR = 2.0
_N_DIRECTIONS = 16
_MAX_HALVINGS = 80


@dataclass(frozen=True)
class SingleAvoidanceResult:
    q: Polynomial
    margin: float
    certified: bool
    sup_change: float
    perturbed_roots: tuple[tuple[complex, complex], ...] = ()
    eta: float = 0.0

    def to_json(self) -> dict:
        return {
            "q": self.q.to_json(),
            "margin": self.margin,
            "certified": self.certified,
            "sup_change": self.sup_change,
            "eta": self.eta,
            "perturbed_roots": [[[a.real, a.imag], [b.real, b.imag]] for a, b in self.perturbed_roots],
        }


def margin_certified(q: Polynomial, a: complex, centers: np.ndarray, radius: float,
                     margin: float | None = None) -> bool:
    """True if ``q != a`` on every disc of the given radius around the centers.

    First tries the global test ``margin > max|q'| * radius`` (with the usual
    safety factor); failing that, checks each center against the exact Taylor
    variation bound of ``q`` on its disc.
    """
    vals = np.abs(horner(q.coeffs, centers) - a)
    if margin is None:
        margin = float(vals.min())
    if margin <= 0:
        return False
    if q.degree == 0:
        return True
    if margin > derivative_sup_bound(q, centers) * radius:
        return True
    return bool(np.all(vals > local_variation_bound(q, centers, radius)))


def _normal_candidates(K: CompactSetSample, z: complex) -> np.ndarray:
    """Unit directions to try: local boundary normals plus a fixed fan."""
    fan = np.exp(2j * np.pi * np.arange(_N_DIRECTIONS) / _N_DIRECTIONS)
    b = K.boundary_points
    k = min(8, b.size)
    if k >= 2:
        _, idx = K.boundary_tree.query([z.real, z.imag], k=k)
        nb = b[np.atleast_1d(idx)]
        X = np.column_stack([nb.real - nb.real.mean(), nb.imag - nb.imag.mean()])
        _, s, vt = np.linalg.svd(X, full_matrices=False)
        if s[0] > 0 and (s.size < 2 or s[1] < 0.5 * s[0]):
            tangent = complex(vt[0, 0], vt[0, 1])
            n = 1j * tangent
            fan = np.concatenate([[n, -n], fan])
    return fan


def _choose_direction(K: CompactSetSample, z: complex, eta: float) -> complex:
    cand = _normal_candidates(K, z)
    moved = z + eta * cand
    score = K.min_distance_to(moved)
    best = score.max()
    tie = score >= best - 1e-9 * max(eta, 1e-300)
    outward = z - K.centroid
    if outward == 0:
        outward = 1.0
    align = np.real(cand * np.conj(outward))
    align[~tie] = -np.inf
    return complex(cand[int(np.argmax(align))])


def _move(p: Polynomial, c0: complex, fixed: list[complex], old: list[complex],
          new: list[complex]) -> Polynomial:
    """``p + r * (prod(z - new) - prod(z - old))`` with ``r = c0 * prod(z - fixed)``.

    The bracket is expanded as a telescoping sum so every term carries a
    factor ``old_i - new_i``; tiny moves therefore stay tiny in the
    coefficients instead of drowning in the rounding of a full rebuild.
    """
    r = from_roots(c0, fixed)
    diff = Polynomial([0.0])
    for i in range(len(old)):
        term = from_roots(old[i] - new[i], new[:i] + old[i + 1:])
        diff = diff + term
    return p + r * diff


def avoid_value(p: Polynomial, a: complex, K: CompactSetSample, eps: float) -> SingleAvoidanceResult:
    """Same-degree ``q`` with ``sup_K |p - q| < eps`` and ``q != a`` on the boundary samples."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    a = complex(a)
    bpts = K.boundary_points
    pts = K.all_points
    if p.degree == 0:
        q = p if p.coeffs[0] != a else p + eps / 2
        margin = abs(complex(q.coeffs[0]) - a)
        return SingleAvoidanceResult(q, margin, margin > 0, float(abs(q.coeffs[0] - p.coeffs[0])))

    g = p - a
    if g.degree < p.degree:
        # a only cancels the constant term when p has degree 0, handled above
        raise AvoidanceError("degree dropped while shifting")
    fact = roots(g)
    zs = list(fact.roots)
    c0 = fact.leading
    threshold = ACTIVATION_FACTOR * K.boundary_mesh
    dist = K.min_distance_to(np.array(zs))
    active = [i for i in range(len(zs)) if dist[i] < threshold]

    def finish(q, sup_change, moved, eta):
        vals = np.abs(horner(q.coeffs, bpts) - a)
        margin = float(vals.min())
        cert = margin_certified(q, a, bpts, K.boundary_mesh, margin)
        return SingleAvoidanceResult(q, margin, cert, sup_change, tuple(moved), eta)

    if not active:
        return finish(p, 0.0, [], 0.0)

    fixed = [zs[i] for i in range(len(zs)) if i not in active]
    old = [zs[i] for i in active]
    # first-order size of moving root k by eta: eta * sup|c0 prod_{j != k}(z - z_j)|
    h_sup = 0.0
    for i in active:
        others = zs[:i] + zs[i + 1:]
        h_sup += float(np.max(np.abs(horner(from_roots(c0, others).coeffs, pts))))
    eta = min(0.9 * eps / max(h_sup, 1e-300), max(K.diameter, 1.0))
    for _ in range(_MAX_HALVINGS):
        new = [z + eta * _choose_direction(K, z, eta) for z in old]
        q = _move(p, c0, fixed, old, new)
        change = q - p
        sup_change = float(np.max(np.abs(horner(change.coeffs, pts))))
        slack = derivative_sup_bound(change, pts) * K.mesh if change.degree > 0 else 0.0
        if sup_change < eps and sup_change + slack < eps and q.degree == p.degree:
            if float(np.min(np.abs(horner(q.coeffs, bpts) - a))) > 0:
                return finish(q, sup_change, list(zip(old, new)), eta)
        eta /= 2
    raise AvoidanceError(f"could not move roots off the boundary within eps={eps:.3e}")
