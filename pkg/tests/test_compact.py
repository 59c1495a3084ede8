from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from avoidant.compact import (DiscSpec, cantor_intervals, from_config, make_arc, make_circle,
                              make_disc_union, make_fat_cantor_product, segments_intersect, union_of)
from avoidant.errors import GeometryError


def random_points_in_disc(rng, c, r, n):
    return c + r * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def covering_radius(K, probes):
    """Brute-force distance from the probe points to the nearest sample."""
    pts = K.all_points
    return max(float(np.min(np.abs(pts - w))) for w in probes)


def test_single_disc_mesh_matches_arc_spacing():
    K = make_disc_union([DiscSpec(0, 1)], samples_per_disc=64)
    assert K.boundary_mesh == pytest.approx(math.pi / 64)
    assert K.boundary_points.size == 64
    assert np.allclose(np.abs(K.boundary_points), 1)
    assert K.has_interior and np.all(np.abs(K.interior_points) < 1)


def test_disc_mesh_covers_the_disc():
    rng = np.random.default_rng(0)
    K = make_disc_union([DiscSpec(0.5j, 0.7)], samples_per_disc=64)
    probes = random_points_in_disc(rng, 0.5j, 0.7, 3000)
    assert covering_radius(K, probes) <= K.mesh


def test_boundary_mesh_covers_the_circle():
    K = make_disc_union([DiscSpec(0, 1)], samples_per_disc=128)
    t = np.linspace(0, 2 * np.pi, 5000)
    b = K.boundary_points
    worst = max(float(np.min(np.abs(b - np.exp(1j * s)))) for s in t)
    assert worst <= K.boundary_mesh


def test_two_disc_separation():
    K = make_disc_union([DiscSpec(-1, 0.9), DiscSpec(1, 0.9)], samples_per_disc=64)
    assert K.component_separation == pytest.approx(0.2)
    assert not K.tangent
    assert set(np.unique(K.component)) == {0, 1}
    assert K.measure == pytest.approx(2 * math.pi * 0.81)


def test_tangent_discs_flagged():
    K = make_disc_union([DiscSpec(-1, 1), DiscSpec(1, 1)], samples_per_disc=64)
    assert K.tangent and K.component_separation == 0


def test_overlapping_discs_rejected():
    with pytest.raises(GeometryError):
        make_disc_union([DiscSpec(0, 1), DiscSpec(1, 1)])


def test_bad_radius_rejected():
    with pytest.raises(GeometryError):
        DiscSpec(0, 0)


def test_circle_has_no_interior():
    K = make_circle(0, 2, 100)
    assert not K.has_interior and K.is_boundary.all()
    assert K.mesh == pytest.approx(2 * math.pi / 100)


def cantor_measure_oracle(r: Fraction, depth: int) -> Fraction:
    # step k removes a middle interval of length r / 4^(k-1) from each of 2^(k-1) intervals
    return 1 - sum(Fraction(2 ** (k - 1)) * r / 4 ** (k - 1) for k in range(1, depth + 1))


@pytest.mark.parametrize("depth", [0, 1, 2, 3, 4])
def test_cantor_intervals_measure(depth):
    r = Fraction(1, 4)
    ints = cantor_intervals(r, depth, exact=True)
    assert len(ints) == 2**depth
    assert sum(b - a for a, b in ints) == cantor_measure_oracle(r, depth)
    floats = cantor_intervals(0.25, depth)
    assert sum(b - a for a, b in floats) == pytest.approx(float(cantor_measure_oracle(r, depth)))


def test_cantor_intervals_disjoint_and_ordered():
    ints = cantor_intervals(0.25, 4)
    for (a0, b0), (a1, b1) in zip(ints, ints[1:]):
        assert a0 < b0 < a1 < b1


def test_fat_cantor_product_area():
    K = make_fat_cantor_product("S_plus_iS", 0.25, 3)
    assert K.measure == pytest.approx(0.5625**2)
    assert float(cantor_measure_oracle(Fraction(1, 4), 3)) == 0.5625
    assert not K.has_interior
    K2 = make_fat_cantor_product("interval_plus_iS", 0.25, 3)
    assert K2.measure == pytest.approx(0.5625)


def test_fat_cantor_mesh_covers_cells():
    rng = np.random.default_rng(1)
    K = make_fat_cantor_product("S_plus_iS", 0.25, 2, per_cell_samples=5)
    ints = cantor_intervals(0.25, 2)
    probes = []
    for ax, bx in ints:
        for ay, by in ints:
            probes += list(rng.uniform(ax, bx, 40) + 1j * rng.uniform(ay, by, 40))
    assert covering_radius(K, probes) <= K.mesh


def test_fat_cantor_depth_limits():
    with pytest.raises(GeometryError):
        make_fat_cantor_product(depth=9)
    with pytest.raises(GeometryError):
        make_fat_cantor_product(kind="square")


def test_arc_samples_segment():
    K = make_arc([0, 1], 11)
    np.testing.assert_allclose(np.sort(K.all_points.real), np.linspace(0, 1, 11), atol=1e-15)
    assert K.mesh == pytest.approx(0.05)
    assert not K.has_interior


def test_self_intersecting_arc_rejected():
    with pytest.raises(GeometryError):
        make_arc([0, 1 + 1j, 1, 1j], 50)


def test_segments_intersect():
    assert segments_intersect(0, 1 + 1j, 1, 1j)
    assert not segments_intersect(0, 1, 1j, 1 + 1j)
    assert segments_intersect(0, 1, 1, 2)


def test_refine_lowers_the_mesh():
    K = make_disc_union([DiscSpec(0, 1)], samples_per_disc=64)
    R = K.refine(4)
    assert R.boundary_points.size == 256
    assert R.mesh < K.mesh and R.boundary_mesh < K.boundary_mesh
    A = make_arc([0, 1j], 11).refine(3)
    assert A.size == 31
    F = make_fat_cantor_product(depth=2, per_cell_samples=5).refine(2)
    assert F.constructor["per_cell_samples"] == 9


def test_from_config_round_trip():
    K = make_disc_union([DiscSpec(1j, 0.5)], samples_per_disc=32)
    K2 = from_config(K.constructor)
    np.testing.assert_array_equal(K.all_points, K2.all_points)
    with pytest.raises(GeometryError):
        from_config({"constructor": "polygon"})


def test_exact_distance():
    K = make_disc_union([DiscSpec(-1, 0.9), DiscSpec(1, 0.9)], samples_per_disc=32)
    assert K.exact_distance(0.0) == pytest.approx(0.1)
    assert K.exact_distance(1.5) == 0
    F = make_fat_cantor_product(depth=1)
    assert F.exact_distance(0.5 + 0.1j) == pytest.approx(0.125)
    assert F.exact_distance(0.1 + 0.1j) == 0
    A = make_arc([0, 1], 11)
    assert A.exact_distance(0.5 + 0.3j) == pytest.approx(0.3)


def test_union_and_min_distance():
    K = union_of(make_circle(0, 1, 64), make_arc([3, 4], 11))
    assert K.size == 75
    assert K.min_distance_to(2.0) == pytest.approx(1.0)


def test_csv_dump_has_tags():
    K = make_arc([0, 1], 3)
    lines = K.to_csv().strip().splitlines()
    assert lines[0] == "re,im,tag"
    assert len(lines) == 4
