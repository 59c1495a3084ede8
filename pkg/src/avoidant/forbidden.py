"""Finite truncations of the countable forbidden value set.

Enumerations are deterministic so that the order-dependent perturbation
schedule downstream is reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import sympy
from scipy.spatial import cKDTree

from .errors import TruncationTooLarge

DEDUPE_TOL = 1e-12
MAX_COUNT = 200_000

Box = tuple[float, float, float, float]  # (re_min, re_max, im_min, im_max)


@dataclass(frozen=True)
class ForbiddenSet:
    values: tuple[complex, ...]
    source: str = "explicit"
    truncation_params: dict = field(default_factory=dict)
    claimed_cover_radius: float | None = None

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.complex128)

    def to_json(self) -> dict:
        return {
            "values": [[v.real, v.imag] for v in self.values],
            "source": self.source,
            "truncation_params": self.truncation_params,
            "claimed_cover_radius": self.claimed_cover_radius,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ForbiddenSet":
        return cls(
            values=tuple(complex(re, im) for re, im in data["values"]),
            source=data.get("source", "explicit"),
            truncation_params=dict(data.get("truncation_params", {})),
            claimed_cover_radius=data.get("claimed_cover_radius"),
        )


def dedupe(values: Iterable[complex], tol: float = DEDUPE_TOL) -> list[complex]:
    """Drop values within ``tol`` of an earlier value; first occurrence wins."""
    vals = [complex(v) for v in values]
    if not vals:
        return []
    arr = np.array(vals)
    tree = cKDTree(np.column_stack([arr.real, arr.imag]))
    keep = np.ones(len(vals), dtype=bool)
    for i in range(len(vals)):
        if not keep[i]:
            continue
        for j in tree.query_ball_point([arr[i].real, arr[i].imag], tol):
            if j > i:
                keep[j] = False
    return [v for v, k in zip(vals, keep) if k]


def explicit_set(values: Sequence[complex]) -> ForbiddenSet:
    return ForbiddenSet(tuple(dedupe(values)), "explicit", {"count": len(values)})


def _in_box(z: complex, box: Box, tol: float = 1e-12) -> bool:
    x0, x1, y0, y1 = box
    return x0 - tol <= z.real <= x1 + tol and y0 - tol <= z.imag <= y1 + tol


def _fractions_in(lo: float, hi: float, max_den: int) -> list[Fraction]:
    out = set()
    for b in range(1, max_den + 1):
        for a in range(math.ceil(lo * b - 1e-9), math.floor(hi * b + 1e-9) + 1):
            f = Fraction(a, b)
            if lo - 1e-12 <= f <= hi + 1e-12:
                out.add(f)
    return sorted(out)


def gaussian_rationals(max_denominator: int, region: Box, max_count: int = MAX_COUNT) -> ForbiddenSet:
    """All ``a/b + (c/d) i`` with ``b, d <= max_denominator`` inside ``region``.

    Ordered by ``max(b, d)`` of the reduced fractions, then by real and
    imaginary part.
    """
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    x0, x1, y0, y1 = region
    # quick size estimate before enumerating
    estimate = (3 * max_denominator**2 / math.pi**2) ** 2 * max(x1 - x0, 1e-9) * max(y1 - y0, 1e-9)
    if estimate > 4 * max_count:
        raise TruncationTooLarge(f"about {int(estimate)} Gaussian rationals requested")
    res = _fractions_in(x0, x1, max_denominator)
    ims = _fractions_in(y0, y1, max_denominator)
    if len(res) * len(ims) > max_count:
        raise TruncationTooLarge(f"{len(res) * len(ims)} Gaussian rationals exceed max_count={max_count}")
    pairs = sorted(itertools.product(res, ims),
                   key=lambda ri: (max(ri[0].denominator, ri[1].denominator), ri[0], ri[1]))
    values = tuple(complex(float(r), float(i)) for r, i in pairs)
    return ForbiddenSet(
        values,
        "gaussian_rational",
        {"max_denominator": max_denominator, "region": list(region)},
        claimed_cover_radius=None,
    )


def _integer_polys(degree: int, height: int):
    """Coefficient tuples (descending) of degree exactly ``degree``, leading > 0, primitive."""
    rng = range(-height, height + 1)
    for lead in range(1, height + 1):
        for rest in itertools.product(rng, repeat=degree):
            coeffs = (lead,) + rest
            if math.gcd(*coeffs) != 1:
                continue
            yield coeffs


def _batch_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of many same-degree polynomials via batched companion eigenvalues."""
    n, d1 = coeffs.shape
    d = d1 - 1
    if d == 1:
        return (-coeffs[:, 1] / coeffs[:, 0])[:, None].astype(np.complex128)
    comp = np.zeros((n, d, d))
    comp[:, 0, :] = -coeffs[:, 1:] / coeffs[:, :1]
    comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
    return np.linalg.eigvals(comp)


def _polish(coeffs: Sequence[int], z: np.ndarray) -> np.ndarray:
    c = np.array(coeffs, dtype=float)
    dc = np.polyder(c)
    for _ in range(2):
        den = np.polyval(dc, z)
        ok = den != 0
        z = np.where(ok, z - np.polyval(c, z) / np.where(ok, den, 1), z)
    return z


def _squarefree_roots(coeffs: Sequence[int]) -> list[complex]:
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(coeffs), x).sqf_part()
    sq = [int(v) for v in poly.all_coeffs()]
    if len(sq) < 2:
        return []
    z = np.roots(np.array(sq, dtype=float)).astype(np.complex128)
    return list(_polish(sq, z))


def algebraic_numbers(max_degree: int, max_height: int, region: Box,
                      max_count: int = MAX_COUNT) -> ForbiddenSet:
    """Roots of integer polynomials with degree <= ``max_degree`` and height <= ``max_height``.

    Order: by degree of the generating polynomial, then height, then the
    value's real and imaginary parts.  Repeated roots are resolved through
    the exact square-free part so that numerically split copies collapse.
    """
    if max_degree < 1 or max_degree > 4:
        raise ValueError("max_degree must lie in [1, 4]")
    if max_height < 0 or max_height > 10:
        raise ValueError("max_height must lie in [0, 10]")
    total = sum(max_height * (2 * max_height + 1) ** d for d in range(1, max_degree + 1))
    if total > 50 * max_count:
        raise TruncationTooLarge(f"{total} integer polynomials to solve")
    found: list[tuple[int, int, complex]] = []
    for d in range(1, max_degree + 1):
        polys = list(_integer_polys(d, max_height)) if max_height > 0 else []
        if not polys:
            continue
        arr = np.array(polys, dtype=float)
        zs = _batch_roots(arr)
        heights = np.abs(arr).max(axis=1).astype(int)
        for row, (coeffs, z) in enumerate(zip(polys, zs)):
            if d > 1:
                gaps = np.abs(z[:, None] - z[None, :]) + np.eye(d)
                if gaps.min() < 1e-5:
                    z = np.array(_squarefree_roots(coeffs))
                else:
                    z = _polish(coeffs, z)
            for v in z:
                v = complex(v)
                if abs(v.imag) < 1e-14:
                    v = complex(v.real, 0.0)
                v = complex(v.real + 0.0, v.imag + 0.0)
                if _in_box(v, region):
                    found.append((d, int(heights[row]), v))
    found.sort(key=lambda t: (t[0], t[1], t[2].real, t[2].imag))
    values = dedupe([v for _, _, v in found], tol=1e-9)
    if len(values) > max_count:
        raise TruncationTooLarge(f"{len(values)} algebraic numbers exceed max_count={max_count}")
    return ForbiddenSet(
        tuple(values),
        "algebraic",
        {"max_degree": max_degree, "max_height": max_height, "region": list(region)},
    )


def truncate_to_reach(A: ForbiddenSet, value_bound: float, slack: float = 0.0) -> ForbiddenSet:
    """Keep only the values a polynomial bounded by ``value_bound`` could reach."""
    if value_bound < 0:
        raise ValueError("value_bound must be nonnegative")
    radius = value_bound + slack
    kept = tuple(v for v in A.values if abs(v) <= radius)
    params = dict(A.truncation_params)
    params["discard_radius"] = radius
    params["discarded"] = len(A.values) - len(kept)
    return ForbiddenSet(kept, A.source, params, A.claimed_cover_radius)
