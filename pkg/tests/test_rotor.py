import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cos2_adaptive, cos4_diagonal_adaptive
from rotorpath.constants import HBAR, K_B
from rotorpath.errors import ConfigurationError
from rotorpath.rotor import (
    MOLECULES,
    GeometryMatrix,
    MoleculeSpec,
    boltzmann_populations,
    cos2_matrix_element,
    geometry_matrix,
    interaction_matrix,
    rotor_energies,
    rotor_energy,
)

N14 = MOLECULES["n14"]
N15 = MOLECULES["n15"]


def test_physical_constants_codata_values():
    assert HBAR == 1.054571817e-34
    assert K_B == 1.380649e-23


# --- molecule spec ------------------------------------------------------


def test_registry_parameters():
    assert N14.moment_of_inertia == 1.4e-46
    assert N15.moment_of_inertia == 1.5e-46
    assert N14.delta_alpha == N15.delta_alpha == 1.97e-40


def test_molecule_spec_invariants():
    with pytest.raises(ConfigurationError):
        MoleculeSpec(name="bad", moment_of_inertia=-1e-46, delta_alpha=1e-40)
    with pytest.raises(ConfigurationError):
        MoleculeSpec(name="bad", moment_of_inertia=1e-46, delta_alpha=0.0)
    # consistent mu R^2 accepted, inconsistent rejected
    MoleculeSpec(
        name="ok", moment_of_inertia=2.0e-46, delta_alpha=1e-40,
        reduced_mass=2.0e-26, bond_length=1.0e-10,
    )
    with pytest.raises(ConfigurationError):
        MoleculeSpec(
            name="bad", moment_of_inertia=2.1e-46, delta_alpha=1e-40,
            reduced_mass=2.0e-26, bond_length=1.0e-10,
        )


# --- energies -----------------------------------------------------------


def test_rotor_energy_ground_state_is_zero():
    assert rotor_energy(0, N14) == 0.0


def test_rotor_energy_formula_instantiation():
    # l = 1: E = (hbar^2 / 2I) * 2 = hbar^2 / I
    assert rotor_energy(1, N14) == pytest.approx(HBAR**2 / 1.4e-46, rel=1e-15)


def test_rotor_energy_ratios():
    assert rotor_energy(2, N14) / rotor_energy(1, N14) == pytest.approx(3.0, rel=1e-14)
    assert rotor_energy(2, N15) / rotor_energy(1, N15) == pytest.approx(3.0, rel=1e-14)


def test_energy_ladder_spacing():
    e = rotor_energies(8, N14)
    spacing = np.diff(e)
    expected = HBAR**2 / N14.moment_of_inertia * np.arange(1, 8)
    np.testing.assert_allclose(spacing, expected, rtol=1e-14)
    assert np.all(np.diff(spacing) > 0)


def test_rotor_energy_rejects_negative_level():
    with pytest.raises(ConfigurationError):
        rotor_energy(-1, N14)


# --- cos^2 matrix elements ----------------------------------------------


def test_cos2_ground_diagonal_is_one_third():
    assert abs(cos2_matrix_element(0, 0) - 1.0 / 3.0) < 1e-12


def test_cos2_parity_zero():
    assert cos2_matrix_element(1, 0) == 0.0


def test_cos2_02_matches_closed_form_and_quadrature():
    got = cos2_matrix_element(2, 0)
    closed = (1 * 2) / (3 * np.sqrt(1 * 5))  # [(l+1)(l+2)]/[(2l+3) sqrt((2l+1)(2l+5))], l = 0
    oracle = cos2_adaptive(2, 0, tol=1e-12)
    assert closed == pytest.approx(oracle, abs=1e-12)
    assert got == pytest.approx(oracle, abs=1e-12)


def test_cos2_selection_rule_exact_zero():
    for l_to in range(8):
        for l_from in range(8):
            if abs(l_to - l_from) not in (0, 2):
                assert cos2_matrix_element(l_to, l_from) == 0.0


def test_cos2_symmetry():
    for l in range(6):
        assert cos2_matrix_element(l, l + 2) == pytest.approx(
            cos2_matrix_element(l + 2, l), abs=1e-15
        )


def test_geometry_matches_adaptive_quadrature_two_tolerances():
    g = geometry_matrix(8).elements
    for tol in (1e-10, 1e-12):
        for l_to in range(8):
            for l_from in range(8):
                assert g[l_to, l_from] == pytest.approx(
                    cos2_adaptive(l_to, l_from, tol=tol), abs=100 * tol
                )


def test_geometry_diagonal_range_and_limit():
    g = geometry_matrix(24).elements
    diag = np.diag(g)
    assert np.all(diag > 0) and np.all(diag < 1)
    # approaches 1/2 from either side as l grows
    assert abs(diag[23] - 0.5) < abs(diag[2] - 0.5)
    assert abs(diag[23] - 0.5) < 5e-4


def test_geometry_completeness_bound():
    # sum_l' <l'|cos^2|l>^2 <= <l|cos^4|l> on the truncated basis
    g = geometry_matrix(10).elements
    for l in range(8):  # away from the truncation edge
        lhs = float(np.sum(g[:, l] ** 2))
        rhs = cos4_diagonal_adaptive(l)
        assert lhs <= rhs + 1e-12


# --- interaction matrix -------------------------------------------------


def test_interaction_zero_field():
    g = geometry_matrix(8)
    v = interaction_matrix(0.0, N14, g)
    assert np.all(v == 0.0)


def test_interaction_quadratic_field_scaling():
    g = geometry_matrix(8)
    e = 6e9
    v1 = interaction_matrix(e**2, N14, g)
    v2 = interaction_matrix((2 * e) ** 2, N14, g)
    np.testing.assert_allclose(v2, 4.0 * v1, rtol=1e-14)


def test_interaction_element_20_nitrogen_parameters():
    g = geometry_matrix(8)
    v = interaction_matrix((6e9) ** 2, N14, g)
    expected = -0.25 * 1.97e-40 * (6e9) ** 2 * cos2_adaptive(2, 0, tol=1e-12)
    assert v[2, 0] == pytest.approx(expected, rel=1e-10)


def test_interaction_diagonal_zeroed():
    g = geometry_matrix(8)
    v = interaction_matrix((6e9) ** 2, N14, g)
    assert np.all(np.diag(v) == 0.0)
    # but the geometry itself keeps its diagonal
    assert g.elements[0, 0] == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_interaction_rejects_negative_field_squared():
    with pytest.raises(ConfigurationError):
        interaction_matrix(-1.0, N14, geometry_matrix(8))


# --- thermal populations --------------------------------------------------


def test_boltzmann_infinite_temperature_limit():
    e = rotor_energies(8, N14)
    p = boltzmann_populations(1e9, e).populations
    np.testing.assert_allclose(p, np.full(8, 1 / 8), atol=1e-6)


def test_boltzmann_ratio_cancels_partition():
    e = rotor_energies(8, N14)
    for t in (2.0, 6.3, 50.0):
        p = boltzmann_populations(t, e).populations
        assert p[0] / p[1] == pytest.approx(np.exp((e[1] - e[0]) / (K_B * t)), rel=1e-12)


def test_boltzmann_nitrogen_experiment_temperature():
    e = rotor_energies(8, N14)
    state = boltzmann_populations(6.3, e)
    assert abs(np.sum(state.populations) - 1.0) < 1e-12
    assert np.sum(state.populations[:3]) > 0.95  # l = 0, 1, 2 dominate


def test_boltzmann_rejects_nonpositive_temperature():
    with pytest.raises(ConfigurationError):
        boltzmann_populations(0.0, rotor_energies(8, N14))


@settings(max_examples=40, deadline=None)
@given(
    temperature=st.floats(min_value=0.5, max_value=1e4),
    inertia=st.floats(min_value=5e-47, max_value=5e-46),
)
def test_boltzmann_properties(temperature, inertia):
    spec = MoleculeSpec(name="x", moment_of_inertia=inertia, delta_alpha=1e-40)
    p = boltzmann_populations(temperature, rotor_energies(8, spec)).populations
    assert abs(np.sum(p) - 1.0) < 1e-12
    assert np.all(np.diff(p) <= 0)


def test_geometry_matrix_validation():
    with pytest.raises(ConfigurationError):
        GeometryMatrix(elements=np.array([[0.0, 1.0], [0.5, 0.0]]))
