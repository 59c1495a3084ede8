"""Function evaluators and the polynomial-approximation front end.

This module produces the intermediate polynomial ``q`` close to ``g`` on a
sampled set: exact passthrough for polynomials, truncated Taylor series with
an explicit tail bound, and a verified least-squares fit otherwise.  It also
holds the disc rescaling ``g(z) = f(c + (1 - xi)(z - c))`` and the
nearest-sample extension of ``g`` from the closure of the interior to the
whole set.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .compact import CompactSetSample, DiscSpec
from .errors import FitError, RescaleError
from .poly import Polynomial, horner

XI_FLOOR = 1e-6
DEFAULT_MAX_DEGREE = 48
BOUNDARY_WEIGHT = 2.0
RIDGE = 1e-12
LAWSON_ITERS = 40


@dataclass(frozen=True)
class TaylorSeries:
    """Entire (or disc-convergent) function known through its power series.

    ``tail_bound(n, rho)`` must bound ``sum_{k>n} |c_k| rho**k``.
    """

    name: str
    center: complex
    coefficient: Callable[[int], complex]
    exact: Callable[[np.ndarray], np.ndarray]
    tail_bound: Callable[[int, float], float]
    radius: float = math.inf

    def partial_sum(self, n: int) -> Polynomial:
        coeffs = [self.coefficient(k) for k in range(n + 1)]
        return _shift_basis(coeffs, self.center, 1.0)


@dataclass(frozen=True, eq=False)
class FunctionEvaluator:
    """A function on a sampled set: polynomial, Taylor series, or a value table."""

    kind: str
    polynomial: Polynomial | None = None
    series: TaylorSeries | None = None
    points: np.ndarray | None = None
    values: np.ndarray | None = None
    description: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("polynomial", "taylor_series", "callable_samples"):
            raise ValueError(f"unknown evaluator kind {self.kind!r}")

    @property
    def evaluable_anywhere(self) -> bool:
        return self.kind != "callable_samples"

    def __call__(self, z):
        if self.kind == "polynomial":
            return self.polynomial(z)
        if self.kind == "taylor_series":
            out = self.series.exact(np.asarray(z, dtype=np.complex128))
            return complex(out) if np.ndim(z) == 0 else out
        return self._lookup(z)

    def _lookup(self, z):
        zz = np.asarray(z, dtype=np.complex128)
        flat = zz.ravel()
        d, idx = self._tree.query(np.column_stack([flat.real, flat.imag]))
        if np.any(d > 1e-9 * (1 + np.abs(flat))):
            raise ValueError("sample-table function evaluated off its table")
        out = self.values[idx]
        return complex(out[0]) if zz.ndim == 0 else out.reshape(zz.shape)

    @property
    def _tree(self) -> cKDTree:
        tree = self.__dict__.get("_tree_cache")
        if tree is None:
            tree = cKDTree(np.column_stack([self.points.real, self.points.imag]))
            self.__dict__["_tree_cache"] = tree
        return tree

    def on(self, K: CompactSetSample) -> np.ndarray:
        """Values on ``K.all_points``; aligned tables skip the lookup."""
        if self.kind == "callable_samples" and self.points is K.all_points:
            return self.values
        return np.asarray(self(K.all_points), dtype=np.complex128)


@dataclass(frozen=True)
class RescaleParams:
    xi_per_component: tuple[float, ...]

    def __post_init__(self):
        if not all(0 < x < 1 for x in self.xi_per_component):
            raise ValueError("each xi must lie in (0, 1)")


# -- builtin functions -------------------------------------------------------

def polynomial_function(p: Polynomial | Sequence[complex]) -> FunctionEvaluator:
    if not isinstance(p, Polynomial):
        p = Polynomial(p)
    return FunctionEvaluator("polynomial", polynomial=p,
                             description={"name": "poly", "coeffs": p.to_json()})


def constant_function(value: complex) -> FunctionEvaluator:
    f = polynomial_function(Polynomial.constant(value))
    return FunctionEvaluator("polynomial", polynomial=f.polynomial,
                             description={"name": "constant", "value": [complex(value).real, complex(value).imag]})


def identity_function() -> FunctionEvaluator:
    return FunctionEvaluator("polynomial", polynomial=Polynomial.identity(),
                             description={"name": "identity"})


def exp_function(scale: complex = 1.0, rate: complex = 1.0, shift: complex = 0.0) -> FunctionEvaluator:
    """``scale * exp(rate * z) + shift``."""
    scale, rate, shift = complex(scale), complex(rate), complex(shift)

    def coefficient(k: int) -> complex:
        c = scale * rate**k / math.factorial(k)
        return c + shift if k == 0 else c

    def tail(n: int, rho: float) -> float:
        x = abs(rate) * rho
        return abs(scale) * x ** (n + 1) / math.factorial(n + 1) * math.exp(x)

    series = TaylorSeries("exp", 0j, coefficient,
                          lambda z: scale * np.exp(rate * z) + shift, tail)
    return FunctionEvaluator("taylor_series", series=series,
                             description={"name": "exp", "scale": [scale.real, scale.imag],
                                          "rate": [rate.real, rate.imag],
                                          "shift": [shift.real, shift.imag]})


def sin_function(scale: complex = 1.0, rate: complex = 1.0, shift: complex = 0.0) -> FunctionEvaluator:
    """``scale * sin(rate * z) + shift``."""
    scale, rate, shift = complex(scale), complex(rate), complex(shift)

    def coefficient(k: int) -> complex:
        c = 0j if k % 2 == 0 else scale * (-1) ** (k // 2) * rate**k / math.factorial(k)
        return c + shift if k == 0 else c

    def tail(n: int, rho: float) -> float:
        x = abs(rate) * rho
        return abs(scale) * x ** (n + 1) / math.factorial(n + 1) * math.exp(x)

    series = TaylorSeries("sin", 0j, coefficient,
                          lambda z: scale * np.sin(rate * z) + shift, tail)
    return FunctionEvaluator("taylor_series", series=series,
                             description={"name": "sin", "scale": [scale.real, scale.imag],
                                          "rate": [rate.real, rate.imag],
                                          "shift": [shift.real, shift.imag]})


def sample_table(points: np.ndarray, values: np.ndarray, description: dict | None = None) -> FunctionEvaluator:
    points = np.asarray(points, dtype=np.complex128)
    values = np.asarray(values, dtype=np.complex128)
    if points.shape != values.shape:
        raise ValueError("points and values must align")
    return FunctionEvaluator("callable_samples", points=points, values=values,
                             description=description or {"name": "table"})


def read_table_csv(path) -> FunctionEvaluator:
    """CSV with columns ``re, im, f_re, f_im``."""
    pts, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            pts.append(complex(float(row["re"]), float(row["im"])))
            vals.append(complex(float(row["f_re"]), float(row["f_im"])))
    return sample_table(np.array(pts), np.array(vals), {"name": "table", "path": str(path)})


def _pair(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def function_from_config(cfg: dict, base_dir=None) -> FunctionEvaluator:
    name = cfg.get("name")
    if name == "exp":
        return exp_function(_pair(cfg.get("scale", 1.0)), _pair(cfg.get("rate", 1.0)), _pair(cfg.get("shift", 0.0)))
    if name == "sin":
        return sin_function(_pair(cfg.get("scale", 1.0)), _pair(cfg.get("rate", 1.0)), _pair(cfg.get("shift", 0.0)))
    if name == "identity":
        return identity_function()
    if name == "constant":
        return constant_function(_pair(cfg["value"]))
    if name == "poly":
        return polynomial_function(Polynomial.from_json(cfg["coeffs"]))
    if name == "table":
        from pathlib import Path
        path = Path(cfg["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return read_table_csv(path)
    raise ValueError(f"unknown function {name!r}")


# -- rescaling and extension ---------------------------------------------------

def disc_rescale(f: FunctionEvaluator, discs: Sequence[DiscSpec], K: CompactSetSample,
                 target: float) -> tuple[FunctionEvaluator, RescaleParams]:
    """Pull each disc component inward: ``g(z) = f(c + (1 - xi)(z - c))``.

    ``xi`` starts at 1/2 and is halved until the measured ``sup |g - f|`` on
    that component's samples is at most ``target``.  The returned ``g`` is a
    table aligned with ``K.all_points``; points outside every disc hold NaN.
    """
    if not f.evaluable_anywhere:
        raise ValueError("disc rescaling needs a function evaluable off the sample table")
    pts = K.all_points
    g_vals = np.full(pts.shape, np.nan + 0j, dtype=np.complex128)
    f_vals = f.on(K)
    xis = []
    for j, disc in enumerate(discs):
        mask = K.in_closure_interior & (K.component == j)
        z = pts[mask]
        fz = f_vals[mask]
        xi = 0.5
        while True:
            gz = np.asarray(f(disc.center + (1 - xi) * (z - disc.center)))
            err = float(np.max(np.abs(gz - fz))) if z.size else 0.0
            if err <= target:
                break
            xi /= 2
            if xi < XI_FLOOR:
                raise RescaleError(
                    f"disc {j}: no xi >= {XI_FLOOR} brings sup|g-f| below {target:.3e} (last {err:.3e})"
                )
        g_vals[mask] = gz
        xis.append(xi)
    g = sample_table(pts, g_vals, {"name": "disc_rescale", "xi": xis})
    return g, RescaleParams(tuple(xis))


def extend_to_K(g: FunctionEvaluator, K: CompactSetSample,
                f: FunctionEvaluator | None = None) -> FunctionEvaluator:
    """Nearest-sample extension of ``g`` from the closure of the interior to all of ``K``.

    With ``f`` given, the difference ``g - f`` is extended instead and ``f``
    added back, which keeps ``sup |g - f|`` unchanged on the new points.
    """
    pts = K.all_points
    src = K.in_closure_interior
    if g.kind == "callable_samples" and g.points is pts:
        vals = np.array(g.values)
    else:
        vals = np.full(pts.shape, np.nan + 0j, dtype=np.complex128)
        vals[src] = g(pts[src])
    rest = ~src
    if rest.any():
        if not src.any():
            if g.kind != "callable_samples" or np.isnan(vals).any():
                vals = np.asarray(g(pts), dtype=np.complex128)
            return sample_table(pts, vals, {"name": "extension"})
        tree = cKDTree(np.column_stack([pts[src].real, pts[src].imag]))
        _, nn = tree.query(np.column_stack([pts[rest].real, pts[rest].imag]))
        src_idx = np.flatnonzero(src)[nn]
        if f is None:
            vals[rest] = vals[src_idx]
        else:
            fv = f.on(K)
            vals[rest] = fv[rest] + (vals[src_idx] - fv[src_idx])
    return sample_table(pts, vals, {"name": "extension"})


# -- approximation ---------------------------------------------------------------

def _shift_basis(coeffs: Sequence[complex], center: complex, scale: float) -> Polynomial:
    """Expand ``sum b_k ((z - center) / scale)**k`` into the monomial basis."""
    lin = Polynomial([-center / scale, 1.0 / scale])
    acc = Polynomial([coeffs[-1]])
    for b in coeffs[-2::-1]:
        acc = acc * lin + b
    return acc


def _sup_error(q: Polynomial, z: np.ndarray, y: np.ndarray) -> float:
    return float(np.max(np.abs(horner(q.coeffs, z) - y)))


def approximate_poly(g: FunctionEvaluator, K: CompactSetSample, tol: float,
                     max_degree: int = DEFAULT_MAX_DEGREE) -> Polynomial:
    """Polynomial ``q`` with verified ``sup |q - g| < tol`` on every sample of ``K``.

    Polynomials pass through unchanged.  Taylor series are truncated where the
    tail bound drops below ``tol / 2``.  Anything else is fitted by weighted
    least squares with a degree sweep; if plain least squares stalls, Lawson
    reweighting is tried to push the fit toward the minimax error.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = K.all_points
    if g.kind == "polynomial":
        return g.polynomial
    y = g.on(K)
    if np.isnan(y).any():
        raise ValueError("g is undefined on some samples; extend it first")
    if g.kind == "taylor_series":
        s = g.series
        rho = float(np.max(np.abs(z - s.center))) + K.mesh
        for n in range(max_degree + 1):
            if s.tail_bound(n, rho) <= tol / 2:
                q = s.partial_sum(n)
                if _sup_error(q, z, y) < tol:
                    return q
                break
    return _least_squares(z, y, K.is_boundary, tol, max_degree)


def _least_squares(z: np.ndarray, y: np.ndarray, boundary: np.ndarray, tol: float,
                   max_degree: int) -> Polynomial:
    center = complex(0.5 * (z.real.max() + z.real.min()), 0.5 * (z.imag.max() + z.imag.min()))
    scale = float(np.max(np.abs(z - center))) or 1.0
    w = (z - center) / scale
    V = np.vander(w, max_degree + 1, increasing=True)
    base_wt = np.where(boundary, BOUNDARY_WEIGHT, 1.0)
    best = (math.inf, -1, None)

    def solve(d, wt):
        A = V[:, : d + 1] * wt[:, None]
        rhs = y * wt
        if RIDGE > 0 and d > 0:
            reg = np.diag(np.sqrt(RIDGE) * np.arange(d + 1) * np.sqrt(wt.sum()))
            A = np.vstack([A, reg])
            rhs = np.concatenate([rhs, np.zeros(d + 1)])
        b, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        q = _shift_basis(b, center, scale)
        return q, _sup_error(q, z, y)

    errors = []
    for d in range(0, max_degree + 1):
        q, err = solve(d, base_wt)
        errors.append(err)
        if err < best[0]:
            best = (err, d, q)
        if err < tol:
            return q
    # Lawson reweighting at the most promising degrees
    order = sorted(range(max_degree + 1), key=lambda d: errors[d])[:3]
    for d in sorted(order):
        wt = base_wt.copy()
        for _ in range(LAWSON_ITERS):
            q, err = solve(d, np.sqrt(wt))
            if err < best[0]:
                best = (err, d, q)
            if err < tol:
                return q
            r = np.abs(horner(q.coeffs, z) - y)
            wt = wt * (r / r.max() + 1e-12)
            wt /= wt.sum() / wt.size
    raise FitError(
        f"no degree <= {max_degree} reached sup error {tol:.3e}; best {best[0]:.3e} at degree {best[1]}",
        best_error=best[0], best_degree=best[1],
    )
