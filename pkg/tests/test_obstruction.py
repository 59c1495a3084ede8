from __future__ import annotations

import numpy as np
import pytest

from avoidant.errors import FitError, IndeterminateWinding
from avoidant.obstruction import ClosedCurveSamples, build_gamma, demo_obstruction, winding_number


def circle(n=400, center=0.0, r=1.0, ccw=True):
    t = 2 * np.pi * np.arange(n) / n
    return center + r * np.exp((1j if ccw else -1j) * t)


def test_unit_circle_windings():
    assert winding_number(circle(), 0) == 1
    assert winding_number(circle(), 3) == 0
    assert winding_number(circle(ccw=False), 0) == -1


def test_double_loop_winds_twice():
    t = 4 * np.pi * np.arange(800) / 800
    assert winding_number(np.exp(1j * t), 0.1) == 2


def test_too_close_is_indeterminate():
    with pytest.raises(IndeterminateWinding):
        winding_number(circle(40), 0.99)


def test_winding_stable_under_halved_density():
    g = build_gamma()
    loop = g.loop(4001)
    coarse = ClosedCurveSamples(loop.points[::2])
    for w in (g.a1, g.a2):
        assert winding_number(loop, w) == winding_number(coarse, w)


def test_affine_equivariance():
    pts = circle(300, 0.2, 1.5)
    T = lambda z: (2 - 1j) * z + 4
    for w in (0, 3, 0.5j):
        try:
            before = winding_number(pts, w)
        except IndeterminateWinding:
            continue
        assert winding_number(T(pts), T(w)) == before


def test_closed_curve_is_closed():
    c = ClosedCurveSamples(circle(10))
    assert c.points[0] == c.points[-1]
    with pytest.raises(ValueError):
        ClosedCurveSamples([0, 1])


def test_canonical_curve_layout():
    g = build_gamma(0, -1 - 3j)
    assert g.intersection == pytest.approx(g(g.intersection_params[0]))
    assert g(g.intersection_params[0]) == pytest.approx(g(g.intersection_params[1]))
    loop = g.loop()
    assert winding_number(loop, g.a1) in (1, -1)
    assert winding_number(loop, g.a2) == 0


def test_remapped_curve_same_topology():
    g = build_gamma(0, 1)
    loop = g.loop()
    assert abs(winding_number(loop, 0)) == 1 and winding_number(loop, 1) == 0


def test_equal_points_rejected():
    with pytest.raises(ValueError):
        build_gamma(1j, 1j)


def test_exact_curve_meets_segment():
    rep = demo_obstruction(eps=0.01, use_exact=True)
    assert rep.winding_difference != 0
    assert rep.min_distance_to_segment == 0
    assert rep.crossing_params
    s = rep.crossing_params[0]
    g = build_gamma()
    # the crossing lies on the segment [a1, a2] up to the sampling step
    z = g(s)
    ab = g.a2 - g.a1
    t = ((z - g.a1) * np.conj(ab)).real / abs(ab) ** 2
    assert 0 <= t <= 1
    assert abs(z - (g.a1 + t * ab)) < 2 * rep.mesh_scale


@pytest.mark.parametrize("eps", [0.02, 0.01, 0.005])
def test_fitted_curve_is_obstructed(eps):
    rep = demo_obstruction(eps=eps)
    assert rep.fit_error < eps
    assert rep.verdict == "obstructed"
    assert rep.min_sample_distance < 10 * rep.mesh_scale


def test_guard_rejects_large_eps():
    with pytest.raises(ValueError):
        demo_obstruction(eps=0.5)


def test_low_degree_fit_fails():
    with pytest.raises(FitError):
        demo_obstruction(eps=0.001, fit_degree=3)


def test_report_json_and_csv():
    rep = demo_obstruction(a1=0, a2=1, eps=0.01)
    data = rep.to_json()
    assert data["verdict"] == "obstructed"
    assert data["a2"] == [1.0, 0.0]
    assert rep.loop.to_csv().startswith("s,re,im\n")
