import math

import numpy as np
import pytest

from superscar.errors import (HitSingularity, NonPositiveBudget, NotPeriodic,
                              StartAtSingularity)
from superscar.flow import (PhaseSpaceBox, billiard_trace, enumerate_translates,
                            find_cylinder, first_return, search_periodic_directions,
                            time_budget, trace_flow, trace_position, translate_reach,
                            verify_no_self_intersection)
from superscar.geometry import l_surface, rectangle_torus, square_torus


def test_horizontal_closed_orbit():
    tr = trace_flow(square_torus(), (0.5, 0.5), (1, 0), 3.0)
    assert tr.terminal == "Completed"
    assert tr.total_length == pytest.approx(3.0)
    assert tr.end.xy == pytest.approx((0.5, 0.5))


def test_first_return_diagonal():
    L, d = first_return(square_torus(), (0.2, 0.3), (1, 1), 10.0)
    assert L == pytest.approx(math.sqrt(2))
    assert d == pytest.approx([1.0, 1.0])


def test_irrational_direction_not_periodic():
    with pytest.raises(NotPeriodic):
        first_return(square_torus(), (0.2, 0.3), (1, math.sqrt(2)), 20.0)


def test_start_at_cone_point():
    with pytest.raises(StartAtSingularity):
        trace_flow(l_surface(), (1.0, 1.0), (1, 0), 1.0)


def test_singular_orbit_stops():
    tr = trace_flow(l_surface(), (0.5, 0.5), (1, 1), 10.0)
    assert tr.hit_singularity
    assert tr.total_length == pytest.approx(math.sqrt(0.5))


def test_trace_position():
    tr = trace_flow(square_torus(), (0.5, 0.5), (1, 0), 2.0)
    assert trace_position(tr, 0.75).xy == pytest.approx((0.25, 0.5))
    with pytest.raises(ValueError):
        trace_position(tr, 3.0)


@pytest.mark.parametrize("xi, L, w", [((1, 0), 1.0, 1.0), ((1, 2), math.sqrt(5), 1 / math.sqrt(5)),
                                      ((1, 1), math.sqrt(2), 1 / math.sqrt(2))])
def test_torus_cylinders(xi, L, w):
    c = find_cylinder(square_torus(), xi, (0.3, 0.3), 100.0)
    assert c.length == pytest.approx(L, rel=1e-12)
    assert c.width == pytest.approx(w, rel=1e-12)


@pytest.mark.parametrize("x0, xi, L", [((0.5, 1.5), (1, 0), 1.0), ((0.5, 0.5), (1, 0), 2.0),
                                       ((0.5, 0.5), (0, 1), 2.0)])
def test_l_surface_cylinders(x0, xi, L):
    c = find_cylinder(l_surface(), xi, x0, 100.0)
    assert c.length == pytest.approx(L)
    assert c.width == pytest.approx(1.0)
    assert c.boundary_saddles


def test_find_cylinder_singular():
    with pytest.raises(HitSingularity):
        find_cylinder(l_surface(), (1, 1), (0.5, 0.5), 10.0)


def test_search_sorted():
    found = search_periodic_directions(square_torus(), 2.5, (0.3, 0.3))
    lengths = [c.length for _, c in found]
    assert lengths == sorted(lengths)
    assert lengths[0] == pytest.approx(1.0)
    assert search_periodic_directions(square_torus(), 0.5, (0.3, 0.3)) == []


def test_time_budget():
    assert time_budget(0.01, 0.05, 12, 2) == pytest.approx(0.01 ** 0.85)
    # the transverse and longitudinal caps bind on a small torus
    assert time_budget(0.01, 0.05, 1, 1) == pytest.approx(0.01 / 4)
    with pytest.warns(UserWarning):
        time_budget(0.01, 0.0, 1, 1)
    with pytest.raises(ValueError):
        time_budget(-0.1, 0.05, 1, 1)
    with pytest.raises(NonPositiveBudget):
        time_budget(0.01, 0.05, 1, 1, c=0.0)


def test_self_intersection():
    T = rectangle_torus(12, 2)
    cyl = find_cylinder(T, (1, 0), (6, 1), 100.0)
    box = PhaseSpaceBox.from_hbar((6, 1), (1, 0), 0.02, 0.05)
    assert verify_no_self_intersection(T, box, cyl, 0.036, 0.02).ok
    small = find_cylinder(square_torus(), (1, 0), (0.5, 0.5), 10.0)
    box = PhaseSpaceBox.from_hbar((0.5, 0.5), (1, 0), 0.02, 0.05)
    assert not verify_no_self_intersection(square_torus(), box, small, 1.0, 0.02).ok


def test_translates_include_identity():
    T = square_torus()
    cyl = find_cylinder(T, (1, 0), (0.5, 0.5), 10.0)
    ts = enumerate_translates(T, cyl, (0.5, 0.5), (1, 0), 0.0025, 0.01)
    trans = [tuple(np.round(t, 9)) for t in ts.translations]
    assert (0.0, 0.0) in trans
    assert translate_reach(1.0, 0.5, 0.1) == pytest.approx(8.4)


def test_billiard_reflects():
    from superscar.geometry import PlanarPolygon
    t, p = billiard_trace(PlanarPolygon([[0, 0], [1, 0], [1, 1], [0, 1]]), (0.5, 0.5), (1, 0), 2.0)
    assert p[-1] == pytest.approx([0.5, 0.5])
    assert t[-1] == pytest.approx(2.0)
