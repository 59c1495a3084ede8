"""Complex polynomials: evaluation, roots, reconstruction and local bounds.

Coefficients are stored in ascending degree order, ``coeffs[k]`` multiplying
``z**k``.  Polynomials are immutable values; every operation returns a new
instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import RootFindingError

RESIDUAL_TOL = 1e-10
ROOT_MATCH_TOL = 1e-7
TRIM_TOL = 1e-13
SAFETY_FACTOR = 1.05

_EPS = np.finfo(float).eps
_MAX_ITER = 500
_CLUSTER_RADII = tuple(1e-6 * 2.0**k for k in range(16))


def _as_coeff_array(coeffs: Iterable[complex]) -> np.ndarray:
    arr = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs,
                   dtype=np.complex128).ravel()
    if arr.size == 0:
        arr = np.zeros(1, dtype=np.complex128)
    scale = np.max(np.abs(arr))
    if scale == 0.0:
        return np.zeros(1, dtype=np.complex128)
    nz = np.flatnonzero(np.abs(arr) > TRIM_TOL * scale)
    arr = arr[: nz[-1] + 1].copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Polynomial with complex coefficients in ascending degree order."""

    coeffs: np.ndarray

    def __init__(self, coeffs: Iterable[complex]):
        object.__setattr__(self, "coeffs", _as_coeff_array(coeffs))

    @classmethod
    def constant(cls, value: complex) -> "Polynomial":
        return cls([value])

    @classmethod
    def identity(cls) -> "Polynomial":
        return cls([0.0, 1.0])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z):
        return horner(self.coeffs, z)

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0.0])
        k = np.arange(1, len(self.coeffs))
        return Polynomial(self.coeffs[1:] * k)

    def _binary(self, other, op):
        if not isinstance(other, Polynomial):
            other = Polynomial([other])
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, dtype=np.complex128)
        b = np.zeros(n, dtype=np.complex128)
        a[: len(self.coeffs)] = self.coeffs
        b[: len(other.coeffs)] = other.coeffs
        return Polynomial(op(a, b))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return len(self.coeffs) == len(other.coeffs) and bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self) -> int:
        return hash(self.coeffs.tobytes())

    def __repr__(self) -> str:
        return f"Polynomial(degree={self.degree}, coeffs={self.coeffs.tolist()!r})"

    def to_json(self) -> list[list[float]]:
        return [[float(c.real), float(c.imag)] for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence) -> "Polynomial":
        coeffs = []
        for item in data:
            if isinstance(item, (list, tuple)):
                re, im = item
                coeffs.append(complex(re, im))
            else:
                coeffs.append(complex(item))
        return cls(coeffs)


@dataclass(frozen=True)
class RootFactorization:
    """``leading * prod(z - r for r in roots)``; repeated roots appear repeatedly."""

    leading: complex
    roots: tuple[complex, ...]

    def polynomial(self) -> Polynomial:
        return from_roots(self.leading, self.roots)

    def multiplicities(self, tol: float = ROOT_MATCH_TOL) -> list[tuple[complex, int]]:
        """Group roots closer than ``tol`` and return (centroid, multiplicity) pairs."""
        groups = _single_linkage(np.array(self.roots, dtype=np.complex128), lambda z: tol)
        out = []
        for idx in groups:
            zs = np.array(self.roots, dtype=np.complex128)[idx]
            out.append((complex(np.mean(zs)), len(idx)))
        return out


def horner(coeffs: np.ndarray, z):
    """Evaluate the ascending-order coefficient vector at ``z`` (scalar or array)."""
    z_arr = np.asarray(z, dtype=np.complex128)
    acc = np.full(z_arr.shape, coeffs[-1], dtype=np.complex128)
    for c in coeffs[-2::-1]:
        acc = acc * z_arr + c
    if np.ndim(z) == 0:
        return complex(acc)
    return acc


def evaluate(p: Polynomial, z):
    """Horner evaluation of ``p`` at ``z``."""
    return horner(p.coeffs, z)


def eval_scale(p: Polynomial, z):
    """``sum |c_k| |z|**k``: the magnitude against which rounding in ``p(z)`` is measured."""
    return np.real(horner(np.abs(p.coeffs).astype(np.complex128), np.abs(np.asarray(z))))


def _nonempty(samples) -> np.ndarray:
    pts = np.asarray(samples, dtype=np.complex128).ravel()
    if pts.size == 0:
        raise ValueError("sample list is empty")
    return pts


def sup_on(p: Polynomial, samples) -> float:
    """Discrete sup norm: ``max |p(z)|`` over the samples."""
    pts = _nonempty(samples)
    return float(np.max(np.abs(horner(p.coeffs, pts))))


def derivative_sup_bound(p: Polynomial, samples, safety_factor: float = SAFETY_FACTOR) -> float:
    """``safety_factor * max |p'(z)|`` over the samples."""
    pts = _nonempty(samples)
    return safety_factor * sup_on(p.derivative(), pts)


def taylor_coefficients(p: Polynomial, centers) -> np.ndarray:
    """Taylor coefficients of ``p`` at each center, shape ``(len(centers), degree + 1)``.

    Column ``k`` holds ``p^(k)(b) / k!``.
    """
    b = np.asarray(centers, dtype=np.complex128).ravel()
    m = p.degree
    work = np.tile(p.coeffs[::-1], (b.size, 1))
    for k in range(m):
        for j in range(1, m + 1 - k):
            work[:, j] += b * work[:, j - 1]
    return work[:, ::-1]


def local_variation_bound(p: Polynomial, centers, radius: float) -> np.ndarray:
    """Upper bound on ``|p(z) - p(b)|`` over ``|z - b| <= radius`` for each center ``b``.

    Uses the exact Taylor expansion at ``b``, so no safety factor is involved.
    """
    t = np.abs(taylor_coefficients(p, centers))
    powers = radius ** np.arange(p.degree + 1)
    powers[0] = 0.0
    return t @ powers


def from_roots(leading: complex, roots: Sequence[complex]) -> Polynomial:
    """Expand ``leading * prod(z - r)``."""
    roots = list(roots)
    if leading == 0 and roots:
        raise ValueError("leading coefficient must be nonzero when roots are given")
    coeffs = np.array([1.0 + 0.0j])
    for r in roots:
        nxt = np.zeros(len(coeffs) + 1, dtype=np.complex128)
        nxt[1:] += coeffs
        nxt[:-1] -= r * coeffs
        coeffs = nxt
    return Polynomial(coeffs * leading)


def _root_radius(coeffs: np.ndarray) -> float:
    """Fujiwara's bound on the moduli of the roots."""
    n = len(coeffs) - 1
    a = np.abs(coeffs[:-1] / coeffs[-1])
    terms = [a[n - k] ** (1.0 / k) for k in range(1, n)]
    terms.append((a[0] / 2.0) ** (1.0 / n))
    return 2.0 * max(terms) if terms else 1.0


def _single_linkage(z: np.ndarray, radius_of) -> list[list[int]]:
    """Connected components of the graph linking points closer than ``radius_of``."""
    n = z.size
    if n == 0:
        return []
    r = np.array([radius_of(w) for w in z])
    adj = np.abs(z[:, None] - z[None, :]) < r[:, None]
    _, labels = connected_components(csr_matrix(adj), directed=False)
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    return list(groups.values())


def _snap_clusters(p: Polynomial, z: np.ndarray) -> np.ndarray:
    """Replace tight clusters by their centroid when the centroid is itself a root.

    A computed m-fold root spreads like eps**(1/m) but the cluster mean stays
    accurate, so a cluster is collapsed only if the residual at its centroid is
    at rounding level.
    """
    z = z.copy()
    # the spread grows with the multiplicity, so widen the linking radius step by step
    for rel in _CLUSTER_RADII:
        groups = _single_linkage(z, lambda w: rel * max(1.0, abs(w)))
        if len(groups) == z.size:
            continue
        for idx in groups:
            if len(idx) < 2 or np.all(z[idx] == z[idx[0]]):
                continue
            c = complex(np.mean(z[idx]))
            if abs(p(c)) > 64 * _EPS * float(eval_scale(p, c)):
                continue
            c = _polish_multiple(p, c, len(idx))
            if _is_multiple_root(p, c, len(idx)):
                z[idx] = c
    return z


def _is_multiple_root(p: Polynomial, c: complex, m: int, tol: float = 1e-8) -> bool:
    """``p^(k)(c)`` is negligible for every ``k < m``."""
    d = p
    for _ in range(m):
        if abs(d(c)) > tol * float(eval_scale(d, c)):
            return False
        d = d.derivative()
    return True


def _polish_multiple(p: Polynomial, c: complex, m: int) -> complex:
    # an m-fold root of p is a simple root of its (m-1)-th derivative
    d = p
    for _ in range(m - 1):
        d = d.derivative()
    dd = d.derivative()
    for _ in range(3):
        den = dd(c)
        if den == 0:
            break
        c_new = c - d(c) / den
        if abs(p(c_new)) > abs(p(c)) and abs(c_new - c) > 1e-4 * max(1.0, abs(c)):
            break
        c = c_new
    return c


def roots(p: Polynomial, max_iter: int = _MAX_ITER) -> RootFactorization:
    """All roots of ``p`` by Aberth-Ehrlich simultaneous iteration."""
    m = p.degree
    if m < 1:
        raise ValueError("roots() needs degree >= 1")
    c = p.coeffs
    if m == 1:
        return RootFactorization(p.leading, (complex(-c[0] / c[1]),))
    dc = p.derivative().coeffs
    radius = _root_radius(c)
    k = np.arange(m)
    z = radius * np.exp(1j * (2 * np.pi * k / m + 0.4))
    active = np.ones(m, dtype=bool)
    for _ in range(max_iter):
        pz = horner(c, z)
        scale = eval_scale(p, z)
        done = np.abs(pz) <= 8 * _EPS * scale
        active &= ~done
        if not active.any():
            break
        dpz = horner(dc, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            w = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(w)
        w[bad] = 1e-3 * (1 + np.abs(z[bad]))
        w[~active] = 0.0
        z = z - w
        small = np.abs(w) <= 4 * _EPS * np.maximum(np.abs(z), 1e-300)
        active &= ~small
        if not active.any():
            break
    z = _snap_clusters(p, z)
    resid = np.abs(horner(c, z))
    scale = eval_scale(p, z)
    if np.any(resid > RESIDUAL_TOL * np.maximum(scale, 1e-300)):
        raise RootFindingError(
            f"root iteration did not converge for degree {m} "
            f"(worst relative residual {float(np.max(resid / scale)):.3e})"
        )
    return RootFactorization(p.leading, tuple(complex(v) for v in z))
