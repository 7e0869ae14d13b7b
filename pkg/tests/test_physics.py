import numpy as np
import pytest

from radmesh import (
    BoundarySpec,
    MaterialMap,
    PhysicsParams,
    ReferenceGrid,
    atomic_number_at,
    coupling_source,
    initial_state,
    material_conduction_coeff,
    opacity,
    radiation_diffusion_coeff,
    uniform_mesh,
)
from radmesh.physics import material_map_for_preset


class TestOpacity:
    def test_values(self):
        assert opacity(1.0, 1.0) == 1.0
        assert opacity(1.0, 5.0) == 125.0
        assert opacity(2.0, 10.0) == 125.0

    def test_rejects_nonpositive_temperature(self):
        with pytest.raises(ValueError):
            opacity(0.0, 1.0)
        with pytest.raises(ValueError):
            opacity(np.array([1.0, -0.5]), 1.0)


class TestDiffusionCoefficients:
    def test_radiation(self):
        assert radiation_diffusion_coeff(1.0, 0.0, 1.0) == pytest.approx(1 / 3)
        assert radiation_diffusion_coeff(1.0, 3.0, 1.0) == pytest.approx(1 / 6)
        with pytest.raises(ValueError):
            radiation_diffusion_coeff(0.0, 1.0, 1.0)

    def test_free_streaming_limit(self):
        grads = np.logspace(0, 8, 9)
        d = radiation_diffusion_coeff(1.0, grads, 1.0)
        assert np.all(np.diff(d) < 0)
        assert d[-1] < 1e-7

    def test_monotone_in_energy(self):
        E = np.linspace(0.1, 5.0, 50)
        d = radiation_diffusion_coeff(E, 2.0, 1.0)
        assert np.all(np.diff(d) > 0)

    def test_conduction(self):
        assert material_conduction_coeff(1.0, 0.01) == pytest.approx(0.01)
        assert material_conduction_coeff(4.0, 0.01) == pytest.approx(0.32)
        assert material_conduction_coeff(1.0, 1.0) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            material_conduction_coeff(-1.0)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            PhysicsParams(kappa=0.0)


class TestCouplingSource:
    def test_equilibrium(self):
        s_e, s_t = coupling_source(1.0, 1.0, 1.0)
        assert s_e == 0.0 and s_t == 0.0

    def test_direct(self):
        s_e, s_t = coupling_source(1e-30, 1.0, 1.0)
        assert s_e == pytest.approx(1.0)
        assert s_t == pytest.approx(-1.0)

    def test_antisymmetry_bitexact(self):
        rng = np.random.default_rng(1)
        E = rng.random((20, 20)) + 0.1
        T = rng.random((20, 20)) + 0.1
        s_e, s_t = coupling_source(E, T, 2.0)
        assert np.array_equal(s_e, -s_t)


class TestMaterialMap:
    def test_example1(self):
        m = material_map_for_preset("example1")
        assert atomic_number_at(0.5, 0.5, m) == 5.0
        assert atomic_number_at(0.1, 0.1, m) == 1.0

    def test_example2(self):
        m = material_map_for_preset("example2")
        assert atomic_number_at(0.5, 0.5, m) == 10.0
        assert atomic_number_at(0.1, 0.1, m) == 1.0

    def test_example3(self):
        m = material_map_for_preset("example3")
        assert atomic_number_at(0.3, 0.7, m) == 10.0
        assert atomic_number_at(0.7, 0.3, m) == 10.0
        assert atomic_number_at(0.5, 0.5, m) == 1.0

    def test_open_rectangles(self):
        m = MaterialMap(((0.25, 0.75, 0.25, 0.75, 9.0),), background=2.0)
        assert atomic_number_at(0.25, 0.5, m) == 2.0  # edge takes background
        assert atomic_number_at(0.2500001, 0.5, m) == 9.0

    def test_piecewise_constant_values_only(self):
        m = material_map_for_preset("example3")
        xs, ys = np.meshgrid(np.linspace(0, 1, 201), np.linspace(0, 1, 201))
        z = atomic_number_at(xs, ys, m)
        assert set(np.unique(z)) == {1.0, 10.0}

    def test_validation(self):
        with pytest.raises(ValueError):
            MaterialMap(((0.5, 0.4, 0.0, 1.0, 5.0),))
        with pytest.raises(ValueError):
            MaterialMap((), background=-1.0)


class TestInitialState:
    def test_driven_layer_values(self):
        mesh = uniform_mesh(ReferenceGrid(11, 11))
        st = initial_state("example1", mesh)
        assert np.allclose(st.E[0, :], 1.0)  # tanh(0) = 0
        expected_far = (1 - np.tanh(10.0)) * (1 - 1e-5) + 1e-5
        assert st.E[-1, 0] == pytest.approx(expected_far, rel=1e-12)
        assert expected_far == pytest.approx(1.0004e-5, rel=1e-3)

    def test_gaussian_spot(self):
        mesh = uniform_mesh(ReferenceGrid(11, 11))
        st = initial_state("example3", mesh)
        assert st.E[0, 0] == pytest.approx(100.001, rel=1e-12)
        assert st.T[0, 0] == pytest.approx(100.001**0.25, rel=1e-12)
        assert st.E[-1, -1] == pytest.approx(0.001, rel=1e-6)

    def test_equilibrium_start(self):
        mesh = uniform_mesh(ReferenceGrid(21, 21))
        for name in ("example1", "example2", "example3"):
            st = initial_state(name, mesh)
            assert np.abs(st.T**4 / st.E - 1.0).max() < 1e-14

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            initial_state("example9", uniform_mesh(ReferenceGrid(5, 5)))


def test_boundary_spec_validation():
    BoundarySpec("marshak")
    BoundarySpec("insulated")
    with pytest.raises(ValueError):
        BoundarySpec("periodic")
