"""Sampled compact plane sets with boundary/interior tags and mesh metadata.

A :class:`CompactSetSample` stands in for a compact set ``K``.  Its ``mesh``
is an upper bound on the distance from any point of the represented set to
the nearest sample, and ``boundary_mesh`` is the same bound for the boundary
alone.  Every constructor records the parameters it was called with so the
sample can be regenerated at a higher density (:meth:`CompactSetSample.refine`).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import GeometryError

_TANGENT_TOL = 1e-12


@dataclass(frozen=True)
class DiscSpec:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError(f"disc radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True, eq=False)
class CompactSetSample:
    all_points: np.ndarray
    is_boundary: np.ndarray
    is_interior: np.ndarray
    in_closure_interior: np.ndarray
    component: np.ndarray
    mesh: float
    boundary_mesh: float
    component_separation: float = 0.0
    tangent: bool = False
    discs: tuple[DiscSpec, ...] = ()
    measure: float | None = None
    constructor: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("all_points", "is_boundary", "is_interior", "in_closure_interior", "component"):
            getattr(self, name).setflags(write=False)
        if not self.mesh > 0:
            raise GeometryError("mesh must be positive")
        if np.any(self.is_boundary & self.is_interior):
            raise GeometryError("a sample cannot be both boundary and interior")

    @property
    def boundary_points(self) -> np.ndarray:
        return self.all_points[self.is_boundary]

    @property
    def interior_points(self) -> np.ndarray:
        return self.all_points[self.is_interior]

    @property
    def closure_interior_points(self) -> np.ndarray:
        return self.all_points[self.in_closure_interior]

    @property
    def has_interior(self) -> bool:
        return bool(self.is_interior.any())

    @property
    def size(self) -> int:
        return int(self.all_points.size)

    @cached_property
    def boundary_tree(self) -> cKDTree:
        b = self.boundary_points
        return cKDTree(np.column_stack([b.real, b.imag]))

    @cached_property
    def centroid(self) -> complex:
        return complex(np.mean(self.all_points))

    @cached_property
    def diameter(self) -> float:
        pts = self.all_points
        re, im = pts.real, pts.imag
        return float(math.hypot(re.max() - re.min(), im.max() - im.min()))

    def min_distance_to(self, z):
        """Distance from ``z`` (scalar or array) to the nearest boundary sample."""
        zz = np.asarray(z, dtype=np.complex128)
        d, _ = self.boundary_tree.query(np.column_stack([zz.ravel().real, zz.ravel().imag]))
        if zz.ndim == 0:
            return float(d[0])
        return d.reshape(zz.shape)

    def nearest_boundary(self, z: complex) -> complex:
        _, i = self.boundary_tree.query([z.real, z.imag])
        return complex(self.boundary_points[i])

    def exact_distance(self, z):
        """Distance from ``z`` to the represented continuum (0 inside it).

        Uses the constructor's exact geometry rather than the samples.
        """
        zz = np.asarray(z, dtype=np.complex128)
        d = _exact_distance(self.constructor, zz.ravel())
        return float(d[0]) if zz.ndim == 0 else d.reshape(zz.shape)

    def refine(self, factor: int) -> "CompactSetSample":
        """Rebuild this set with ``factor`` times the linear sampling density."""
        if factor < 1:
            raise ValueError("refinement factor must be >= 1")
        if factor == 1:
            return self
        return from_config(_refined_config(self.constructor, factor))

    def tags(self) -> np.ndarray:
        return np.where(self.is_interior, "interior", "boundary")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["re", "im", "tag"])
        for z, tag in zip(self.all_points, self.tags()):
            writer.writerow([repr(float(z.real)), repr(float(z.imag)), tag])
        return buf.getvalue()


def _disc_points(disc: DiscSpec, n: int, n_int: int) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Boundary circle with ``n`` samples plus concentric interior rings.

    Interior rings are spaced for ``n_int`` samples on a full circle, so the
    boundary can be sampled much more densely than the interior.
    """
    c, r = disc.center, disc.radius
    theta = 2 * math.pi * np.arange(n) / n
    boundary = c + r * np.exp(1j * theta)
    h = 2 * math.pi * r / n_int
    rings = max(1, math.ceil(r / h))
    dr = r / rings
    interior = [np.array([c])]
    arc_max = h
    for i in range(1, rings):
        ri = i * dr
        ni = math.ceil(2 * math.pi * ri / h)
        phase = 0.5 * (i % 2) * 2 * math.pi / ni
        interior.append(c + ri * np.exp(1j * (2 * math.pi * np.arange(ni) / ni + phase)))
        arc_max = max(arc_max, 2 * math.pi * ri / ni)
    # radial step to the nearest ring, then along that ring
    mesh = dr / 2 + arc_max / 2
    # arc-length half spacing on the circle bounds the chord distance too
    boundary_mesh = math.pi * r / n
    return boundary, np.concatenate(interior), mesh, boundary_mesh


def make_disc_union(discs: Sequence[DiscSpec], samples_per_disc: int = 1024,
                    interior_samples: int | None = None) -> CompactSetSample:
    """Union of closed discs that are pairwise disjoint or exactly tangent.

    ``samples_per_disc`` points go on each boundary circle; the interior polar
    grid is spaced as if ``interior_samples`` points (default
    ``min(samples_per_disc, 256)``) were on the circle.
    """
    discs = tuple(discs)
    if not discs:
        raise GeometryError("need at least one disc")
    if samples_per_disc < 8:
        raise GeometryError("samples_per_disc must be >= 8")
    if interior_samples is None:
        interior_samples = min(samples_per_disc, 256)
    if not 8 <= interior_samples <= samples_per_disc:
        raise GeometryError("interior_samples must lie in [8, samples_per_disc]")
    tangent = False
    separation = math.inf
    for i in range(len(discs)):
        for j in range(i + 1, len(discs)):
            a, b = discs[i], discs[j]
            gap = abs(a.center - b.center) - a.radius - b.radius
            if gap < -_TANGENT_TOL:
                raise GeometryError(f"discs {i} and {j} overlap; unsupported geometry")
            if abs(gap) <= _TANGENT_TOL:
                tangent = True
                gap = 0.0
            separation = min(separation, gap)
    if separation == math.inf:
        separation = 0.0

    pts, bnd, comp = [], [], []
    mesh = bmesh = 0.0
    for k, d in enumerate(discs):
        boundary, interior, m, bm = _disc_points(d, samples_per_disc, interior_samples)
        pts += [boundary, interior]
        bnd += [np.ones(boundary.size, bool), np.zeros(interior.size, bool)]
        comp.append(np.full(boundary.size + interior.size, k))
        mesh, bmesh = max(mesh, m), max(bmesh, bm)
    points = np.concatenate(pts)
    is_b = np.concatenate(bnd)
    return CompactSetSample(
        all_points=points,
        is_boundary=is_b,
        is_interior=~is_b,
        in_closure_interior=np.ones(points.size, bool),
        component=np.concatenate(comp),
        mesh=mesh,
        boundary_mesh=bmesh,
        component_separation=float(separation),
        tangent=tangent,
        discs=discs,
        measure=float(sum(math.pi * d.radius**2 for d in discs)),
        constructor={
            "constructor": "disc_union",
            "discs": [{"center": [d.center.real, d.center.imag], "radius": d.radius} for d in discs],
            "samples_per_disc": samples_per_disc,
            "interior_samples": interior_samples,
        },
    )


def make_circle(center: complex = 0.0, radius: float = 1.0, samples: int = 256) -> CompactSetSample:
    """A circle as a set in its own right: every sample is a boundary point."""
    if radius <= 0 or samples < 8:
        raise GeometryError("circle needs positive radius and >= 8 samples")
    center = complex(center)
    pts = center + radius * np.exp(2j * math.pi * np.arange(samples) / samples)
    mesh = math.pi * radius / samples
    return CompactSetSample(
        all_points=pts,
        is_boundary=np.ones(samples, bool),
        is_interior=np.zeros(samples, bool),
        in_closure_interior=np.zeros(samples, bool),
        component=np.zeros(samples, int),
        mesh=mesh,
        boundary_mesh=mesh,
        constructor={"constructor": "circle", "center": [center.real, center.imag],
                     "radius": radius, "samples": samples},
    )


def cantor_intervals(removal_ratio: float, depth: int, exact: bool = False) -> list[tuple]:
    """Intervals left after ``depth`` removal steps of a fat Cantor construction.

    Step ``k`` removes an open middle interval of length ``removal_ratio / 4**k``
    from each of the ``2**k`` current intervals, so the total removed length is
    ``removal_ratio * (1 + 1/2 + ... + 2**-(depth-1))``.
    """
    num = Fraction(removal_ratio).limit_denominator(10**12) if exact else removal_ratio
    one = Fraction(1) if exact else 1.0
    intervals = [(0 * one, one)]
    for k in range(depth):
        gap = num / 4**k
        nxt = []
        for lo, hi in intervals:
            if not gap < hi - lo:
                raise GeometryError(
                    f"removal ratio {removal_ratio} is not realizable at depth {k + 1}"
                )
            mid = (lo + hi) / 2
            nxt += [(lo, mid - gap / 2), (mid + gap / 2, hi)]
        intervals = nxt
    return intervals


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = max(2, math.ceil((hi - lo) / step - 1e-9) + 1)
    return np.linspace(lo, hi, n)


def make_fat_cantor_product(kind: str = "S_plus_iS", removal_ratio: float = 0.25, depth: int = 3,
                            per_cell_samples: int = 8) -> CompactSetSample:
    """Finite-depth approximant of ``S + iS`` or ``[0,1] + iS`` for a fat Cantor set ``S``.

    Each cell is sampled on a rectangular grid that includes its edges; every
    sample is tagged boundary (the empty-interior regime).
    """
    if kind not in ("S_plus_iS", "interval_plus_iS"):
        raise GeometryError(f"unknown fat Cantor kind {kind!r}")
    if not 0 < removal_ratio < 1:
        raise GeometryError("removal_ratio must lie in (0, 1)")
    if not 0 <= depth <= 8:
        raise GeometryError("depth must lie in [0, 8]")
    if per_cell_samples < 2:
        raise GeometryError("per_cell_samples must be >= 2")
    ints = cantor_intervals(removal_ratio, depth)
    cell_len = ints[0][1] - ints[0][0]
    step = cell_len / (per_cell_samples - 1)
    ys = [np.linspace(lo, hi, per_cell_samples) for lo, hi in ints]
    if kind == "S_plus_iS":
        xs = ys
        hx = step
    else:
        xs = [_grid(0.0, 1.0, step)]
        hx = float(xs[0][1] - xs[0][0])
    pts, comp = [], []
    k = 0
    for x in xs:
        for y in ys:
            X, Y = np.meshgrid(x, y)
            pts.append((X + 1j * Y).ravel())
            comp.append(np.full(X.size, k))
            k += 1
    points = np.concatenate(pts)
    length = sum(hi - lo for lo, hi in ints)
    area = length * length if kind == "S_plus_iS" else length
    mesh = math.hypot(hx / 2, step / 2)
    n = points.size
    return CompactSetSample(
        all_points=points,
        is_boundary=np.ones(n, bool),
        is_interior=np.zeros(n, bool),
        in_closure_interior=np.zeros(n, bool),
        component=np.concatenate(comp),
        mesh=mesh,
        boundary_mesh=mesh,
        measure=float(area),
        constructor={"constructor": "fat_cantor_product", "kind": kind,
                     "removal_ratio": removal_ratio, "depth": depth,
                     "per_cell_samples": per_cell_samples},
    )


def _orient(a: complex, b: complex, c: complex) -> float:
    return (b - a).real * (c - a).imag - (b - a).imag * (c - a).real


def _on_segment(a: complex, b: complex, c: complex, tol: float) -> bool:
    return (min(a.real, b.real) - tol <= c.real <= max(a.real, b.real) + tol
            and min(a.imag, b.imag) - tol <= c.imag <= max(a.imag, b.imag) + tol)


def segments_intersect(p1: complex, p2: complex, q1: complex, q2: complex, tol: float = 1e-12) -> bool:
    """Closed-segment intersection test, collinear overlaps included."""
    d1, d2 = _orient(q1, q2, p1), _orient(q1, q2, p2)
    d3, d4 = _orient(p1, p2, q1), _orient(p1, p2, q2)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and \
       ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)):
        return True
    if abs(d1) <= tol and _on_segment(q1, q2, p1, tol):
        return True
    if abs(d2) <= tol and _on_segment(q1, q2, p2, tol):
        return True
    if abs(d3) <= tol and _on_segment(p1, p2, q1, tol):
        return True
    if abs(d4) <= tol and _on_segment(p1, p2, q2, tol):
        return True
    return False


def _check_simple(vertices: Sequence[complex]) -> None:
    n = len(vertices) - 1
    for i in range(n):
        a, b = vertices[i], vertices[i + 1]
        if a == b:
            raise GeometryError(f"repeated control point at index {i}")
        for j in range(i + 1, n):
            c, d = vertices[j], vertices[j + 1]
            if j == i + 1:
                # adjacent segments share b; only a fold-back overlap is a problem
                if abs(_orient(a, b, d)) <= 1e-12 and ((d - b) * (a - b).conjugate()).real > 0:
                    raise GeometryError("polyline folds back on itself")
                continue
            if segments_intersect(a, b, c, d):
                raise GeometryError(f"polyline self-intersects (segments {i} and {j})")


def make_arc(control_points: Sequence[complex], samples: int = 201) -> CompactSetSample:
    """Arclength-uniform samples along a simple polyline."""
    verts = [complex(v) for v in control_points]
    if len(verts) < 2:
        raise GeometryError("an arc needs at least two control points")
    if samples < 2:
        raise GeometryError("an arc needs at least two samples")
    _check_simple(verts)
    seg = np.abs(np.diff(np.array(verts)))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = float(cum[-1])
    s = np.linspace(0.0, total, samples)
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
    t = (s - cum[idx]) / seg[idx]
    v = np.array(verts)
    pts = v[idx] + t * (v[idx + 1] - v[idx])
    pts[0], pts[-1] = verts[0], verts[-1]
    mesh = total / (samples - 1) / 2
    return CompactSetSample(
        all_points=pts,
        is_boundary=np.ones(samples, bool),
        is_interior=np.zeros(samples, bool),
        in_closure_interior=np.zeros(samples, bool),
        component=np.zeros(samples, int),
        mesh=mesh,
        boundary_mesh=mesh,
        measure=0.0,
        constructor={"constructor": "arc",
                     "control_points": [[v.real, v.imag] for v in verts],
                     "samples": samples},
    )


def union_of(*parts: CompactSetSample) -> CompactSetSample:
    """Union of sampled sets, e.g. a disc with an arc attached to it."""
    if not parts:
        raise GeometryError("union needs at least one part")
    comp, offset = [], 0
    for p in parts:
        comp.append(p.component + offset)
        offset += int(p.component.max()) + 1
    discs = tuple(d for p in parts for d in p.discs)
    seps = [p.component_separation for p in parts if p.discs]
    return CompactSetSample(
        all_points=np.concatenate([p.all_points for p in parts]),
        is_boundary=np.concatenate([p.is_boundary for p in parts]),
        is_interior=np.concatenate([p.is_interior for p in parts]),
        in_closure_interior=np.concatenate([p.in_closure_interior for p in parts]),
        component=np.concatenate(comp),
        mesh=max(p.mesh for p in parts),
        boundary_mesh=max(p.boundary_mesh for p in parts),
        component_separation=min(seps) if seps else 0.0,
        tangent=any(p.tangent for p in parts),
        discs=discs,
        constructor={"constructor": "union", "parts": [p.constructor for p in parts]},
    )


def min_distance_to(K: CompactSetSample, z):
    return K.min_distance_to(z)


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def from_config(cfg: dict) -> CompactSetSample:
    """Build a set from a JSON-style description ``{"constructor": name, ...}``."""
    name = cfg.get("constructor")
    if name == "disc_union":
        discs = [DiscSpec(_complex(d["center"]), float(d["radius"])) for d in cfg["discs"]]
        n_int = cfg.get("interior_samples")
        return make_disc_union(discs, int(cfg.get("samples_per_disc", 1024)),
                               None if n_int is None else int(n_int))
    if name == "fat_cantor_product":
        return make_fat_cantor_product(cfg.get("kind", "S_plus_iS"),
                                       float(cfg.get("removal_ratio", 0.25)),
                                       int(cfg.get("depth", 3)),
                                       int(cfg.get("per_cell_samples", 8)))
    if name == "arc":
        return make_arc([_complex(v) for v in cfg["control_points"]], int(cfg.get("samples", 201)))
    if name == "circle":
        return make_circle(_complex(cfg.get("center", 0.0)), float(cfg.get("radius", 1.0)),
                           int(cfg.get("samples", 256)))
    if name == "union":
        return union_of(*[from_config(p) for p in cfg["parts"]])
    raise GeometryError(f"unknown set constructor {name!r}")


def _refined_config(cfg: dict, factor: int) -> dict:
    out = dict(cfg)
    name = cfg["constructor"]
    if name == "disc_union":
        out["samples_per_disc"] = cfg["samples_per_disc"] * factor
        if cfg.get("interior_samples") is not None:
            out["interior_samples"] = cfg["interior_samples"] * factor
    elif name == "fat_cantor_product":
        out["per_cell_samples"] = (cfg["per_cell_samples"] - 1) * factor + 1
    elif name == "arc":
        out["samples"] = (cfg["samples"] - 1) * factor + 1
    elif name == "circle":
        out["samples"] = cfg["samples"] * factor
    elif name == "union":
        out["parts"] = [_refined_config(p, factor) for p in cfg["parts"]]
    return out


def _segment_distance(z: np.ndarray, a: complex, b: complex) -> np.ndarray:
    ab = b - a
    t = np.clip(np.real((z - a) * np.conj(ab)) / abs(ab) ** 2, 0.0, 1.0)
    return np.abs(z - (a + t * ab))


def _interval_distance(x: np.ndarray, intervals: list[tuple[float, float]]) -> np.ndarray:
    out = np.full(x.shape, np.inf)
    for lo, hi in intervals:
        out = np.minimum(out, np.maximum(np.maximum(lo - x, x - hi), 0.0))
    return out


def _exact_distance(cfg: dict, z: np.ndarray) -> np.ndarray:
    name = cfg["constructor"]
    if name == "disc_union":
        out = np.full(z.shape, np.inf)
        for d in cfg["discs"]:
            c = _complex(d["center"])
            out = np.minimum(out, np.maximum(np.abs(z - c) - d["radius"], 0.0))
        return out
    if name == "circle":
        return np.abs(np.abs(z - _complex(cfg["center"])) - cfg["radius"])
    if name == "arc":
        verts = [_complex(v) for v in cfg["control_points"]]
        out = np.full(z.shape, np.inf)
        for a, b in zip(verts[:-1], verts[1:]):
            out = np.minimum(out, _segment_distance(z, a, b))
        return out
    if name == "fat_cantor_product":
        ints = cantor_intervals(cfg["removal_ratio"], cfg["depth"])
        dy = _interval_distance(z.imag, ints)
        if cfg["kind"] == "S_plus_iS":
            dx = _interval_distance(z.real, ints)
        else:
            dx = _interval_distance(z.real, [(0.0, 1.0)])
        return np.hypot(dx, dy)
    if name == "union":
        return np.min([_exact_distance(p, z) for p in cfg["parts"]], axis=0)
    raise GeometryError(f"no exact geometry for {name!r}")
