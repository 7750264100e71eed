"""Dispersive coefficients and model builders."""

import math
import warnings

import numpy as np
import pytest

from qswitch.collective import QubitCollection, pair_product_state
from qswitch.errors import (
    ConfigError,
    DispersiveValidityWarning,
    LayoutError,
    ResonanceError,
)
from qswitch.hamiltonians import (
    DISPERSIVE_RATIO,
    DispersiveCoefficients,
    ResonatorSpec,
    SwitchSpec,
    TransmonSpec,
    bridge_terms,
    build_chain_dispersive,
    build_dispersive,
    build_full_kerr,
    build_jc_reference,
    dispersive_coefficients,
    distant_coupling,
    storage_effective,
)
from qswitch.operators import (
    TWO_PI,
    SpaceLayout,
    basis_state,
    commutator,
    expectation,
    local_operator,
    number,
)

# reference operating point: qubit at 5.00 GHz between 5.18 and 5.20 GHz
# resonators, couplings 18 and 20 MHz
G_S, G_B = 0.018, 0.020
D_S, D_B = -0.18, -0.20
CHI_S = G_S**2 / D_S            # -1.8e-3 GHz
CHI_B = G_B**2 / D_B            # -2.0e-3 GHz
G_AB = G_S * G_B * (D_S + D_B) / (2 * D_S * D_B)   # -1.9e-3 GHz


def two_pair_layout(fock=3):
    return SpaceLayout.build(
        ("a", fock, "boson"), ("b", fock, "boson"),
        ("q1", 2, "qubit"), ("q2", 2, "qubit"),
    )


def switch_spec():
    return SwitchSpec(("q1", "q2"), 5.0, G_S, G_B)


# ---------------------------------------------------------------------------
# coefficients

def test_dispersive_coefficient_values():
    c = dispersive_coefficients(G_S, G_B, D_S, D_B)
    assert c.chi_a == pytest.approx(CHI_S, rel=1e-12)
    assert c.chi_b == pytest.approx(CHI_B, rel=1e-12)
    assert c.g_ab == pytest.approx(G_AB, rel=1e-12)
    assert abs(c.g_ab) == pytest.approx(1.9e-3, rel=1e-12)


def test_resonance_rejected():
    with pytest.raises(ResonanceError):
        dispersive_coefficients(G_S, G_B, 0.0, D_B)
    with pytest.raises(ResonanceError):
        dispersive_coefficients(G_S, G_B, D_S, 0.0)


def test_validity_warning_below_ratio_ten():
    with pytest.warns(DispersiveValidityWarning):
        dispersive_coefficients(G_S, G_B, 9.0 * G_S, D_B)


def test_no_warning_at_the_boundary_ratio():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dispersive_coefficients(G_S, G_B, DISPERSIVE_RATIO * G_S, DISPERSIVE_RATIO * G_B)
        dispersive_coefficients(G_S, G_B, D_S, D_B)  # fig4 point sits at 10 exactly
        dispersive_coefficients(0.0, 0.0, D_S, D_B)  # zero coupling never warns


def test_coefficients_consistency_enforced():
    with pytest.raises(ConfigError):
        DispersiveCoefficients(CHI_S * 1.01, CHI_B, G_AB, D_S, D_B, G_S, G_B)
    with pytest.raises(ConfigError):
        DispersiveCoefficients(CHI_S, CHI_B, G_AB * 1.01, D_S, D_B, G_S, G_B)
    # without the bare couplings the cross checks are skipped
    DispersiveCoefficients(CHI_S, CHI_B, G_AB, D_S, D_B)


# ---------------------------------------------------------------------------
# bridge model

def test_bridge_exchange_element_scales_with_jz():
    layout = two_pair_layout()
    coeffs = dispersive_coefficients(G_S, G_B, D_S, D_B)
    h = bridge_terms(
        layout, ResonatorSpec("a", 5.18, 3), ResonatorSpec("b", 5.20, 3),
        switch_spec(), coeffs,
    )
    assert h.is_hermitian()
    left = basis_state(layout, {"a": 1})
    right = basis_state(layout, {"b": 1})
    element = np.vdot(right.amplitudes, h.matrix @ left.amplitudes)
    assert element == pytest.approx(TWO_PI * coeffs.g_ab * (-2.0), rel=1e-12)


def test_bridge_exchange_vanishes_for_singlet():
    layout = two_pair_layout()
    coeffs = dispersive_coefficients(G_S, G_B, D_S, D_B)
    h = bridge_terms(
        layout, ResonatorSpec("a", 5.18, 3), ResonatorSpec("b", 5.20, 3),
        switch_spec(), coeffs,
    )
    col = QubitCollection.from_labels(("q1", "q2"))
    left = pair_product_state(layout, col, ["singlet"], occupations={"a": 1})
    right = pair_product_state(layout, col, ["singlet"], occupations={"b": 1})
    element = np.vdot(right.amplitudes, h.matrix @ left.amplitudes)
    assert abs(element) < 1e-15


def test_bridge_stark_shift_on_occupied_resonator():
    layout = two_pair_layout()
    coeffs = dispersive_coefficients(G_S, G_B, D_S, D_B)
    h = bridge_terms(
        layout, ResonatorSpec("a", 5.18, 3), ResonatorSpec("b", 5.20, 3),
        switch_spec(), coeffs,
    )
    two_photons = basis_state(layout, {"a": 2})
    val = expectation(h, two_photons).real
    # (1/2) w_q <Jz> + chi_a n_a <Jz> with <Jz> = -2, n_a = 2
    assert val == pytest.approx(TWO_PI * (0.5 * 5.0 * -2.0 + coeffs.chi_a * 2 * -2.0), rel=1e-12)


def test_build_dispersive_conserves_total_excitation():
    layout = two_pair_layout()
    coeffs = dispersive_coefficients(G_S, G_B, D_S, D_B)
    resonators = (ResonatorSpec("a", 5.18, 3), ResonatorSpec("b", 5.20, 3))
    h = build_dispersive(layout, resonators, switch_spec(), coeffs)
    n_total = number(layout, "a") + number(layout, "b") + local_operator(
        layout, {"q1": np.diag([0.0, 1.0])}
    ) + local_operator(layout, {"q2": np.diag([0.0, 1.0])})
    assert np.max(np.abs(commutator(h, n_total).to_dense())) < 1e-12


def test_build_dispersive_requires_two_resonators():
    layout = two_pair_layout()
    coeffs = dispersive_coefficients(G_S, G_B, D_S, D_B)
    with pytest.raises(LayoutError):
        build_dispersive(layout, (ResonatorSpec("a", 5.18, 3),), switch_spec(), coeffs)


def test_layout_dimension_mismatch_caught():
    layout = two_pair_layout(fock=3)
    coeffs = dispersive_coefficients(G_S, G_B, D_S, D_B)
    with pytest.raises(LayoutError):
        build_dispersive(
            layout,
            (ResonatorSpec("a", 5.18, 5), ResonatorSpec("b", 5.20, 3)),
            switch_spec(), coeffs,
        )


# ---------------------------------------------------------------------------
# chain and endpoint validation

def chain_layout():
    return SpaceLayout.build(
        ("a", 3, "boson"), ("b", 3, "boson"), ("c", 3, "boson"),
        ("s1q1", 2, "qubit"), ("s1q2", 2, "qubit"),
        ("s2q1", 2, "qubit"), ("s2q2", 2, "qubit"),
    )


def chain_parts():
    resonators = (
        ResonatorSpec("a", 5.18, 3, role="storage"),
        ResonatorSpec("b", 5.20, 3, role="bus"),
        ResonatorSpec("c", 5.18, 3, role="storage"),
    )
    switches = (
        SwitchSpec(("s1q1", "s1q2"), 5.0, G_S, G_B),
        SwitchSpec(("s2q1", "s2q2"), 5.0, G_B, G_S),
    )
    coeffs = (
        dispersive_coefficients(G_S, G_B, D_S, D_B),
        dispersive_coefficients(G_B, G_S, D_B, D_S),
    )
    return resonators, switches, coeffs


def test_chain_equals_dispersive_for_two_modes():
    layout = two_pair_layout()
    coeffs = dispersive_coefficients(G_S, G_B, D_S, D_B)
    resonators = (ResonatorSpec("a", 5.18, 3), ResonatorSpec("b", 5.20, 3))
    h1 = build_dispersive(layout, resonators, switch_spec(), coeffs)
    h2 = build_chain_dispersive(layout, resonators, (switch_spec(),), (coeffs,))
    assert np.max(np.abs((h1 - h2).to_dense())) == 0.0


def test_chain_rejects_non_adjacent_endpoints():
    layout = chain_layout()
    resonators, switches, coeffs = chain_parts()
    with pytest.raises(LayoutError):
        build_chain_dispersive(
            layout, resonators, switches, coeffs,
            endpoints=(("a", "c"), ("b", "c")),
        )
    build_chain_dispersive(
        layout, resonators, switches, coeffs,
        endpoints=(("a", "b"), ("b", "c")),
    )


def test_chain_length_validation():
    layout = chain_layout()
    resonators, switches, coeffs = chain_parts()
    with pytest.raises(LayoutError):
        build_chain_dispersive(layout, resonators, switches[:1], coeffs)


# ---------------------------------------------------------------------------
# reference and Kerr models

def test_jc_reference_coupling_elements():
    layout = two_pair_layout()
    h = build_jc_reference(
        layout,
        (ResonatorSpec("a", 5.18, 3), ResonatorSpec("b", 5.20, 3)),
        switch_spec(),
    )
    assert h.is_hermitian()
    photon = basis_state(layout, {"a": 1})
    flipped = basis_state(layout, {"q1": 1})
    element = np.vdot(flipped.amplitudes, h.matrix @ photon.amplitudes)
    assert element == pytest.approx(TWO_PI * G_S, rel=1e-12)
    photon_b = basis_state(layout, {"b": 1})
    element_b = np.vdot(flipped.amplitudes, h.matrix @ photon_b.amplitudes)
    assert element_b == pytest.approx(TWO_PI * G_B, rel=1e-12)


def test_full_kerr_anharmonicity_and_cross_kerr():
    layout = SpaceLayout.build(
        ("a", 3, "boson"), ("b", 3, "boson"), ("t", 3, "boson")
    )
    alpha, chi_a = -0.3, -1.8e-3
    h = build_full_kerr(
        layout,
        (ResonatorSpec("a", 5.18, 3), ResonatorSpec("b", 5.20, 3)),
        (TransmonSpec("t", 5.0, alpha, 3, chi_a=chi_a),),
    )
    doubly = basis_state(layout, {"t": 2})
    val = expectation(h, doubly).real
    assert val == pytest.approx(TWO_PI * (2 * 5.0 + alpha), rel=1e-12)
    dressed = basis_state(layout, {"a": 1, "t": 1})
    val2 = expectation(h, dressed).real
    assert val2 == pytest.approx(TWO_PI * (5.18 + 5.0 + chi_a), rel=1e-12)


def test_full_kerr_pair_exchange_term():
    layout = SpaceLayout.build(
        ("a", 2, "boson"), ("b", 2, "boson"),
        ("t1", 2, "boson"), ("t2", 2, "boson"),
    )
    k_pair = 0.004
    h = build_full_kerr(
        layout,
        (ResonatorSpec("a", 5.18, 2), ResonatorSpec("b", 5.20, 2)),
        (TransmonSpec("t1", 5.0, -0.3, 2), TransmonSpec("t2", 5.0, -0.3, 2)),
        pair_couplings=(("t1", "t2", k_pair),),
    )
    one = basis_state(layout, {"t1": 1})
    other = basis_state(layout, {"t2": 1})
    element = np.vdot(other.amplitudes, h.matrix @ one.amplitudes)
    assert element == pytest.approx(TWO_PI * k_pair, rel=1e-12)


# ---------------------------------------------------------------------------
# effective storage-to-storage model

def test_storage_effective_distant_exchange_element():
    layout = chain_layout()
    resonators, switches, coeffs = chain_parts()
    h = storage_effective(layout, resonators, switches, coeffs)
    assert h.is_hermitian()
    left = basis_state(layout, {"a": 1})
    right = basis_state(layout, {"c": 1})
    element = np.vdot(right.amplitudes, h.matrix @ left.amplitudes)
    delta_sb = 5.18 - 5.20
    expected = TWO_PI * (coeffs[0].g_ab * coeffs[1].g_ab / delta_sb) * (-2.0) * (-2.0)
    assert element == pytest.approx(expected, rel=1e-12)
    assert expected / TWO_PI == pytest.approx(-0.722e-3, rel=1e-12)


def test_storage_effective_requires_storage_bus_storage():
    layout = chain_layout()
    resonators, switches, coeffs = chain_parts()
    bad = (resonators[0], ResonatorSpec("b", 5.20, 3, role="storage"), resonators[2])
    with pytest.raises(ConfigError):
        storage_effective(layout, bad, switches, coeffs)


def test_storage_effective_requires_degenerate_storages():
    layout = chain_layout()
    resonators, switches, coeffs = chain_parts()
    bad = (resonators[0], resonators[1], ResonatorSpec("c", 5.19, 3, role="storage"))
    with pytest.raises(ConfigError):
        storage_effective(layout, bad, switches, coeffs)


# ---------------------------------------------------------------------------
# distant coupling arithmetic

def test_distant_coupling_three_mode_formula():
    val = distant_coupling((1.9e-3, 1.9e-3), -0.02, 3)
    assert val == pytest.approx(1.9e-3 * 1.9e-3 / -0.02, rel=1e-15)


def test_distant_coupling_general_chain():
    gs = (1e-3, 2e-3, 3e-3)
    val = distant_coupling(gs, 0.05, 4)
    assert val == pytest.approx(math.prod(gs) / 0.05**2, rel=1e-15)


def test_distant_coupling_validation():
    with pytest.raises(ValueError):
        distant_coupling((1e-3,), 0.05, 2)
    with pytest.raises(ValueError):
        distant_coupling((1e-3,), 0.05, 3)
    with pytest.raises(ResonanceError):
        distant_coupling((1e-3, 1e-3), 0.0, 3)
