import math

import numpy as np
import pytest

from superscar.errors import GridTooCoarse, PointOutsidePolygon, ZeroField
from superscar.semiclassical import (DiracComb, MomentumSymbol, build_folded_quasimode,
                                     closed_form_density, density_l1_distance, dihedral_comb,
                                     dirac_limit_error, folded_momentum_measure,
                                     folded_norm_squared, folded_value, localization_mass,
                                     momentum_density, momentum_density_closed_form,
                                     momentum_density_from_lattice,
                                     momentum_density_from_samples, neumann_defect,
                                     single_atom_comb, test_symbols, weyl_matrix_element)
from superscar.surface import (build_surface_quasimode, grid_for, sample_surface_field,
                               torus_lattice)
from superscar.wavepacket import EuclideanQuasimodeEval, SemiclassicalParams, TimeWindow

SQUARE = [[0, 0], [1, 0], [1, 1], [0, 1]]
DIAG = (1 / math.sqrt(2), 1 / math.sqrt(2))


@pytest.fixture(scope="module")
def torus_ev(desk_torus):
    return build_surface_quasimode(desk_torus, SemiclassicalParams(0.08, 0.05, (6, 1), (1, 0)))


@pytest.fixture(scope="module")
def folded():
    return build_folded_quasimode(SQUARE, SemiclassicalParams(0.04, 0.05, (0.5, 0.5), DIAG))


class TestDensities:
    def test_lattice_normalised(self, torus_ev):
        lat = torus_lattice(torus_ev)
        d = momentum_density_from_lattice(lat.k, lat.coeff, 0.08)
        assert d.total_mass == pytest.approx(1.0)
        assert d.raw_mass * lat.area == pytest.approx(lat.norm_squared())
        assert np.linalg.norm(d.argmax() - [1.0, 0.0]) < 0.2

    def test_dft_matches_lattice(self, torus_ev):
        # samples on the full torus grid: the DFT recovers the Fourier series
        lat = torus_lattice(torus_ev)
        a = momentum_density_from_lattice(lat.k, lat.coeff, 0.08)
        g = grid_for(torus_ev.surface, 0.08)
        vals = sample_surface_field(torus_ev, g)[0].reshape(g.shapes[0])
        b = momentum_density_from_samples(vals, g.steps[0], 0.08, g.origins[0])
        for s in test_symbols((1, 0)):
            assert weyl_matrix_element(s, a) == pytest.approx(weyl_matrix_element(s, b),
                                                              abs=1e-9)

    def test_closed_form_density(self):
        ev = EuclideanQuasimodeEval(SemiclassicalParams(0.05, 0.05), TimeWindow(0.05))
        d = momentum_density_closed_form(ev)
        from superscar.spectral import norm_squared
        assert d.raw_mass == pytest.approx(norm_squared(ev.params, ev.window), rel=1e-6)
        assert d.info["edge_ratio"] < 1e-6
        assert density_l1_distance(d, lambda xi: closed_form_density(ev, xi)) < 1e-6
        assert momentum_density(ev).total_mass == pytest.approx(1.0)

    def test_zero_field(self):
        with pytest.raises(ZeroField):
            momentum_density_from_samples(np.zeros((4, 4)), 0.1, 0.1)

    def test_localization_radius_guard(self, torus_ev):
        lat = torus_lattice(torus_ev)
        d = momentum_density_from_lattice(lat.k, lat.coeff, 0.08)
        with pytest.raises(ValueError):
            localization_mass(d, (1, 0), d.spacing / 2)


class TestSymbols:
    def test_suite(self):
        names = [s.name for s in test_symbols()]
        assert names == ["one", "xi1", "xi2", "abs2", "bump", "cos1", "cos2", "cos3", "cos4"]

    def test_add(self):
        a, b = test_symbols()[1], test_symbols()[2]
        assert (a + b)(np.array([[1.0, 2.0]])) == pytest.approx([3.0])

    def test_comb(self):
        with pytest.raises(ValueError):
            DiracComb(((1, 0),), (0.5,))
        c = single_atom_comb((2, 0))
        assert c.expectation(test_symbols()[1]) == pytest.approx(1.0)

    def test_limit_table_needs_three(self, torus_ev):
        lat = torus_lattice(torus_ev)
        d = momentum_density_from_lattice(lat.k, lat.coeff, 0.08)
        with pytest.raises(ValueError):
            dirac_limit_error({0.08: d, 0.04: d}, single_atom_comb((1, 0)), test_symbols())


class TestFolding:
    def test_comb_atoms(self, folded):
        c = dihedral_comb(folded.unfolding, DIAG)
        atoms = {tuple(np.round(a, 12)) for a in c.distinct_atoms()}
        r = round(1 / math.sqrt(2), 12)
        assert atoms == {(r, r), (-r, r), (r, -r), (-r, -r)}
        # the horizontal direction only has two distinct images
        assert len(dihedral_comb(folded.unfolding, (1, 0)).distinct_atoms()) == 2

    def test_outside(self, folded):
        with pytest.raises(PointOutsidePolygon):
            folded_value(folded, np.array([[1.5, 0.5]]))

    def test_diagonal_symmetry(self, folded):
        # x0 on the diagonal and xi0 along it: swapping coordinates conjugates
        # the group and fixes the packet, so Psi(x, y) = Psi(y, x)
        x = np.array([[0.3, 0.6], [0.8, 0.45]])
        a = folded_value(folded, x)
        b = folded_value(folded, x[:, ::-1])
        assert a == pytest.approx(b, rel=1e-9)

    def test_norm_transfer(self, folded):
        # ||Psi||^2 on P equals ||Lambda||^2 on the unfolding
        from superscar.surface import surface_norm_squared
        n_q = surface_norm_squared(folded.surface_eval)
        assert folded_norm_squared(folded) == pytest.approx(n_q, rel=1e-9)

    def test_unfolded_measure_equal_atoms(self, folded):
        d = folded_momentum_measure(folded, extension="unfolded")
        for a in dihedral_comb(folded.unfolding, DIAG).distinct_atoms():
            assert localization_mass(d, a, 5 * math.sqrt(0.04)) == pytest.approx(0.25, abs=1e-3)

    def test_zero_extension_runs(self, folded):
        d = folded_momentum_measure(folded, extension="zero")
        assert d.total_mass == pytest.approx(1.0)
        with pytest.raises(ValueError):
            folded_momentum_measure(folded, extension="mirror")
        with pytest.raises(GridTooCoarse):
            folded_momentum_measure(folded, spacing=0.5)

    def test_neumann(self):
        fq = build_folded_quasimode(SQUARE, SemiclassicalParams(0.04, 0.05, (0.5, 0.5), (1, 0)))
        assert neumann_defect(fq) < 1e-2
