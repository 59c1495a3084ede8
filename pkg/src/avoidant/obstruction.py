"""Why avoidance fails once ``A`` contains a segment and ``K`` an arc.

The canonical curve is a nodal cubic

    c(u) = (u**2 - 1) + i k u (u**2 - 1),   -T <= u <= T,

which crosses itself at the origin (``u = +-1``) and encloses a loop around
``-1/2``.  It is traversed through the non-polynomial reparametrization
``u = T sin(pi (s - 1/2))`` for ``s`` in ``[0, 1]`` and carried by a
similarity onto user-chosen points ``a1`` (inside the loop) and ``a2``
(outside).  A polynomial close enough to this curve on ``[0, 1]`` must still
wind around ``a1`` but not ``a2``, so its image meets the segment ``[a1, a2]``.
"""

from __future__ import annotations

import io
import csv
import math
from dataclasses import dataclass

import numpy as np

from .compact import make_arc
from .errors import FitError, IndeterminateWinding
from .mergelyan import approximate_poly, sample_table
from .poly import Polynomial, horner

NODE_K = 1.0
NODE_T = 1.3
CANONICAL_A1 = -0.5 + 0.0j
CANONICAL_A2 = 1.5 + 1.0j
# layout used for the default demo
DEFAULT_A1 = 0.0 + 0.0j
DEFAULT_A2 = -1.0 - 3.0j
DEFAULT_SAMPLES = 4001
_ROBUSTNESS = 3.0


@dataclass(frozen=True)
class ClosedCurveSamples:
    points: np.ndarray
    params: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        if pts.size < 3:
            raise ValueError("a closed curve needs at least three samples")
        if pts[0] != pts[-1]:
            pts = np.append(pts, pts[0])
        object.__setattr__(self, "points", pts)

    @property
    def max_spacing(self) -> float:
        return float(np.max(np.abs(np.diff(self.points))))

    def to_csv(self) -> str:
        return _points_csv(self.points, self.params)


def winding_number(curve: ClosedCurveSamples | np.ndarray, w: complex) -> int:
    """Number of times the closed polyline winds counterclockwise around ``w``."""
    if not isinstance(curve, ClosedCurveSamples):
        curve = ClosedCurveSamples(curve)
    z = curve.points - w
    dist = float(np.min(np.abs(z)))
    if not dist > _ROBUSTNESS * curve.max_spacing:
        raise IndeterminateWinding(
            f"point lies {dist:.3e} from the curve, within {_ROBUSTNESS:g}x the sample spacing "
            f"{curve.max_spacing:.3e}"
        )
    turns = np.sum(np.angle(z[1:] / z[:-1])) / (2 * math.pi)
    return int(round(turns))


def _canonical(s):
    u = NODE_T * np.sin(np.pi * (np.asarray(s, dtype=float) - 0.5))
    return (u**2 - 1) + 1j * NODE_K * u * (u**2 - 1)


def _node_params() -> tuple[float, float]:
    d = math.asin(1 / NODE_T) / math.pi
    return 0.5 - d, 0.5 + d


@dataclass(frozen=True)
class Gamma:
    """The self-crossing arc, already mapped by ``w -> scale * w + shift``."""

    a1: complex
    a2: complex
    scale: complex
    shift: complex
    params: np.ndarray
    points: np.ndarray
    intersection: complex
    intersection_params: tuple[float, float]

    def __call__(self, s):
        return self.scale * _canonical(s) + self.shift

    def loop(self, samples: int = DEFAULT_SAMPLES) -> ClosedCurveSamples:
        s1, s2 = self.intersection_params
        s = np.linspace(s1, s2, samples)
        return ClosedCurveSamples(self(s), s)

    def to_csv(self) -> str:
        return _points_csv(self.points, self.params)


def build_gamma(a1: complex = DEFAULT_A1, a2: complex = DEFAULT_A2, samples: int = DEFAULT_SAMPLES) -> Gamma:
    """Self-crossing arc whose loop surrounds ``a1`` and leaves ``a2`` outside."""
    a1, a2 = complex(a1), complex(a2)
    if a1 == a2:
        raise ValueError("a1 and a2 must differ")
    scale = (a2 - a1) / (CANONICAL_A2 - CANONICAL_A1)
    shift = a1 - scale * CANONICAL_A1
    s = np.linspace(0.0, 1.0, samples)
    pts = scale * _canonical(s) + shift
    return Gamma(a1, a2, scale, shift, s, pts, complex(shift), _node_params())


def _points_csv(points: np.ndarray, params: np.ndarray | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "re", "im"])
    for i, z in enumerate(points):
        s = "" if params is None or i >= len(params) else repr(float(params[i]))
        w.writerow([s, repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()


def _segment_distances(z: np.ndarray, a: complex, b: complex) -> np.ndarray:
    ab = b - a
    t = np.clip(np.real((z - a) * np.conj(ab)) / abs(ab) ** 2, 0.0, 1.0)
    return np.abs(z - (a + t * ab))


def _polyline_crossings(z: np.ndarray, a: complex, b: complex) -> np.ndarray:
    """Indices ``i`` whose piece ``z[i] -> z[i+1]`` meets the segment ``[a, b]``."""
    p, q = z[:-1], z[1:]

    def orient(u, v, w):
        return np.imag(np.conj(v - u) * (w - u))

    d1, d2 = orient(a, b, p), orient(a, b, q)
    d3, d4 = orient(p, q, a), orient(p, q, b)
    hit = (d1 * d2 <= 0) & (d3 * d4 <= 0)
    return np.flatnonzero(hit)


def _windows(mask: np.ndarray) -> list[tuple[int, int]]:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    ends = np.concatenate([idx[breaks], [idx[-1]]])
    return list(zip(starts.tolist(), ends.tolist()))


@dataclass
class ObstructionReport:
    a1: complex
    a2: complex
    eps: float
    fit_degree: int
    fit_error: float
    polynomial: Polynomial | None
    winding_a1: int
    winding_a2: int
    winding_difference: int
    loop_params: tuple[float, float]
    closure_gap: float
    min_sample_distance: float
    min_distance_to_segment: float
    crossing_params: list[float]
    mesh_scale: float
    verdict: str
    image_points: np.ndarray
    loop: ClosedCurveSamples

    @property
    def obstructed(self) -> bool:
        return self.verdict == "obstructed"

    def to_json(self) -> dict:
        return {
            "schema": "avoidant-approx/1",
            "a1": [self.a1.real, self.a1.imag],
            "a2": [self.a2.real, self.a2.imag],
            "eps": self.eps,
            "fit_degree": self.fit_degree,
            "fit_error": self.fit_error,
            "polynomial": None if self.polynomial is None else self.polynomial.to_json(),
            "winding_a1": self.winding_a1,
            "winding_a2": self.winding_a2,
            "winding_difference": self.winding_difference,
            "loop_params": list(self.loop_params),
            "closure_gap": self.closure_gap,
            "min_sample_distance": self.min_sample_distance,
            "min_distance_to_segment": self.min_distance_to_segment,
            "crossing_params": self.crossing_params,
            "mesh_scale": self.mesh_scale,
            "verdict": self.verdict,
        }


def demo_obstruction(a1: complex = DEFAULT_A1, a2: complex = DEFAULT_A2, eps: float = 0.01,
                     fit_degree: int = 40, use_exact: bool = False,
                     samples: int = DEFAULT_SAMPLES) -> ObstructionReport:
    """Fit ``p`` to the curve on ``[0, 1]`` and show that ``p([0, 1])`` must meet ``[a1, a2]``.

    The loop of ``p([0, 1])`` is cut out between the two parameter windows
    that pass within ``2 eps`` of the curve's crossing point, closed at the
    closest approach, and its winding numbers around ``a1`` and ``a2`` are
    compared.  ``use_exact`` evaluates the curve itself instead of a fit.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if fit_degree < 1:
        raise ValueError("fit_degree must be positive")
    gamma = build_gamma(a1, a2, samples)
    a1, a2 = gamma.a1, gamma.a2
    guard = float(np.min(np.abs(gamma.loop(samples).points - a1))) / 4
    if not eps < guard:
        raise ValueError(f"eps={eps:g} must be below {guard:.4g} (a quarter of the distance from a1 to the curve)")

    s = gamma.params
    if use_exact:
        p = None
        image = gamma.points
        fit_error = 0.0
        degree = 0
    else:
        B = make_arc([0.0, 1.0], samples)
        f = sample_table(B.all_points, gamma(B.all_points.real))
        try:
            p = approximate_poly(f, B, eps, max_degree=fit_degree)
        except FitError as exc:
            raise FitError(
                f"no fit within eps={eps:g} up to degree {fit_degree}; try a higher --fit-degree",
                exc.best_error, exc.best_degree,
            ) from exc
        image = horner(p.coeffs, s.astype(np.complex128))
        fit_error = float(np.max(np.abs(image - gamma.points)))
        degree = p.degree

    X = gamma.intersection
    wins = _windows(np.abs(image - X) <= 2 * eps)
    if len(wins) != 2:
        raise IndeterminateWinding(f"expected two passes near the crossing point, found {len(wins)}")
    (i0, i1), (j0, j1) = wins
    block = np.abs(image[i0:i1 + 1, None] - image[None, j0:j1 + 1])
    bi, bj = np.unravel_index(int(np.argmin(block)), block.shape)
    i, j = i0 + bi, j0 + bj
    gap = float(block[bi, bj])
    spacing = float(np.max(np.abs(np.diff(image[i:j + 1]))))
    n_close = max(2, int(math.ceil(gap / max(spacing, 1e-300))) + 1)
    closing = np.linspace(image[j], image[i], n_close)[1:]
    loop = ClosedCurveSamples(np.concatenate([image[i:j + 1], closing]))
    w1, w2 = winding_number(loop, a1), winding_number(loop, a2)

    dist = _segment_distances(image, a1, b=a2)
    hits = _polyline_crossings(image, a1, a2)
    crossing_params = [float(0.5 * (s[k] + s[k + 1])) for k in hits]
    min_sample = float(dist.min())
    mesh_scale = float(np.max(np.abs(np.diff(image))))
    return ObstructionReport(
        a1=a1,
        a2=a2,
        eps=eps,
        fit_degree=degree,
        fit_error=fit_error,
        polynomial=p,
        winding_a1=w1,
        winding_a2=w2,
        winding_difference=w1 - w2,
        loop_params=(float(s[i]), float(s[j])),
        closure_gap=gap,
        min_sample_distance=min_sample,
        min_distance_to_segment=0.0 if hits.size else min_sample,
        crossing_params=crossing_params,
        mesh_scale=mesh_scale,
        verdict="obstructed" if w1 != w2 else "not_obstructed",
        image_points=image,
        loop=loop,
    )
