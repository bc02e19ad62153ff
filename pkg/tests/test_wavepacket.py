import math

import numpy as np
import pytest

from superscar.quadrature import adaptive_gl
from superscar.wavepacket import (EuclideanQuasimodeEval, SemiclassicalParams, TimeWindow,
                                  bump, coherent_state_transform, coherent_state_value,
                                  defect_field_value, euclidean_quasimode_value,
                                  free_evolution_value, momentum_route_value, unit_vector,
                                  window_transform)

P = SemiclassicalParams(0.1, 0.05, (0.0, 0.0), (1.0, 0.0))


def test_params_validation():
    with pytest.raises(ValueError):
        SemiclassicalParams(1.5)
    assert SemiclassicalParams(0.1, xi0=(3, 4)).xi0 == pytest.approx((0.6, 0.8))
    assert P.lam == pytest.approx(100.0)
    with pytest.raises(ValueError):
        unit_vector((0.0, 0.0))


def test_window_validation():
    with pytest.raises(ValueError):
        TimeWindow(0.0)
    with pytest.raises(ValueError):
        TimeWindow(1.0, "boxcar")


def test_coherent_state_frozen():
    # frozen oracle: 1/(2 sqrt(pi hbar)) exp(-|x|^2/(2 hbar) + i x.xi0/hbar)
    got = coherent_state_value(P, np.array([0.1, 0.2]))
    assert got == pytest.approx(0.3753688834287006 + 0.5846023986469439j, rel=1e-14)


def test_coherent_state_norm():
    # the state has squared norm 1/4 with this normalisation
    x = np.linspace(-2, 2, 801)
    X = np.stack(np.meshgrid(x, x, indexing="ij"), -1)
    v = coherent_state_value(P, X)
    assert np.sum(np.abs(v) ** 2) * (x[1] - x[0]) ** 2 == pytest.approx(0.25, rel=1e-10)


def test_free_evolution_t0():
    x = np.array([[0.1, -0.2], [0.4, 0.3]])
    assert free_evolution_value(P, 0.0, x) == pytest.approx(coherent_state_value(P, x))


def test_free_evolution_solves_schrodinger():
    # i d/dt u = -Delta u with the propagator exp(i t Delta)
    x = np.array([0.2, 0.05])
    t, dt, dx = 0.03, 1e-5, 1e-3
    ut = (free_evolution_value(P, t + dt, x) - free_evolution_value(P, t - dt, x)) / (2 * dt)
    lap = sum(free_evolution_value(P, t, x + s * e) for s in (-dx, dx)
              for e in (np.array([1, 0]), np.array([0, 1]))) - 4 * free_evolution_value(P, t, x)
    lap /= dx * dx
    assert ut == pytest.approx(1j * lap, rel=1e-4)


def test_group_velocity():
    # the centre moves with speed 2 |xi0| / hbar
    t = 0.01
    x = np.array([[2 * t / P.hbar, 0.0]])
    peak = abs(free_evolution_value(P, t, x)[0])
    off = abs(free_evolution_value(P, t, x + [0.1, 0.0])[0])
    assert peak > off


def test_transform_matches_fft():
    k = np.array([[10.0, 0.0], [11.0, 0.5]])
    x = np.linspace(-3, 3, 601)
    X = np.stack(np.meshgrid(x, x, indexing="ij"), -1)
    f = coherent_state_value(P, X)
    dx = x[1] - x[0]
    for kk, want in zip(k, coherent_state_transform(P, k)):
        direct = np.sum(f * np.exp(-1j * (X @ kk))) * dx * dx / (2 * math.pi)
        assert direct == pytest.approx(want, rel=1e-10, abs=1e-14)


def test_window_transform_quadrature():
    w = TimeWindow(0.2)
    mu = np.array([0.0, 3.0, 10.0])
    direct, _ = adaptive_gl(lambda s: bump(s)[None, :] * np.exp(1j * mu[:, None] * s), -1, 1,
                            rtol=1e-13, panels=4)
    # W(mu) = T int H~(s) exp(-i s mu) ds
    assert window_transform(w, mu) == pytest.approx(w.T * direct, rel=1e-10)


def test_quasimode_frozen():
    ev = EuclideanQuasimodeEval(P, TimeWindow(0.05))
    got = euclidean_quasimode_value(ev, np.array([0.1, 0.2]))
    assert got == pytest.approx(0.0056780097914497125 + 0.007704669075533257j, rel=1e-8)


def test_momentum_route():
    ev = EuclideanQuasimodeEval(P, TimeWindow(0.05), rtol=1e-12)
    x = np.array([[0.0, 0.0], [0.3, 0.1], [1.0, -0.2]])
    a = euclidean_quasimode_value(ev, x)
    b = momentum_route_value(ev, x)
    assert np.max(np.abs(a - b)) <= 1e-9 * np.max(np.abs(a))


def test_defect_route():
    from superscar.wavepacket import defect_transform
    ev = EuclideanQuasimodeEval(P, TimeWindow(0.05), rtol=1e-12)
    x = np.array([[0.0, 0.0], [0.3, 0.1]])
    a = defect_field_value(ev, x)
    b = momentum_route_value(ev, x, transform=defect_transform)
    assert np.max(np.abs(a - b)) <= 1e-9 * np.max(np.abs(a))


def test_support_mask():
    ev = EuclideanQuasimodeEval(P, TimeWindow(0.05))
    far = np.array([[0.0, 50.0]])
    assert not ev.support_mask(far)[0]
    assert euclidean_quasimode_value(ev, far)[0] == 0
