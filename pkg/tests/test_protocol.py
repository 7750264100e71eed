"""Three-step switching scheme: planning, gate conventions, execution."""

import math

import numpy as np
import pytest

from qswitch.collective import QubitCollection, pair_product_state
from qswitch.errors import LayoutError, ResonanceError
from qswitch.hamiltonians import ResonatorSpec, SwitchSpec, bridge_terms, dispersive_coefficients
from qswitch.operators import SpaceLayout, StateVector, basis_state, expectation, pauli
from qswitch.collective import collective_operator
from qswitch.protocol import (
    ProtocolStep,
    PulseSchedule,
    apply_schedule,
    coupling_of_state,
    free_evolution_time,
    plan_switch,
    reversed_schedule,
    simulate_protocol,
)

G_S, G_B, D_S, D_B = 0.018, 0.020, -0.18, -0.20
T2 = 32.89473684210526  # pi / (4 * 2*pi * |chi_s + chi_b|) at the reference point


def coeffs():
    return dispersive_coefficients(G_S, G_B, D_S, D_B)


def switch_layout(n_qubits, fock=3):
    return SpaceLayout.build(
        ("a", fock, "boson"), ("b", fock, "boson"),
        *[(f"q{i}", 2, "qubit") for i in range(n_qubits)],
    )


def bridge(layout, n_qubits):
    spec = SwitchSpec(tuple(f"q{i}" for i in range(n_qubits)), 5.0, G_S, G_B)
    return bridge_terms(
        layout, ResonatorSpec("a", 5.18, 3), ResonatorSpec("b", 5.20, 3), spec, coeffs()
    )


def test_free_evolution_time_value():
    assert free_evolution_time(coeffs()) == pytest.approx(T2, rel=1e-12)


def test_free_evolution_time_needs_nonzero_chi_sum():
    balanced = dispersive_coefficients(0.01, 0.01, 0.1, -0.1)
    with pytest.raises(ResonanceError):
        free_evolution_time(balanced)


def test_step_validation():
    with pytest.raises(ValueError):
        ProtocolStep("quench")
    with pytest.raises(ValueError):
        ProtocolStep("qubit_flip", (), 0.0, "x", math.pi)  # no targets
    with pytest.raises(ValueError):
        ProtocolStep("free_evolution", ("q0",), 1.0)
    with pytest.raises(ValueError):
        ProtocolStep("qubit_flip", ("q0",), -1.0, "x", math.pi)


def test_plan_structure_single_pair():
    c = QubitCollection.from_labels(("q0", "q1"))
    plan = plan_switch(c, coeffs(), 1, 1)
    kinds = [s.kind for s in plan.schedule.steps]
    assert kinds == ["qubit_flip", "free_evolution", "phase_rotation"]
    assert plan.schedule.steps[0].targets == ("q0",)
    assert plan.schedule.steps[1].duration == pytest.approx(T2, rel=1e-12)
    assert plan.t2 == pytest.approx(T2, rel=1e-12)
    assert plan.j_initial == 1 and plan.j_target == 0
    assert plan.schedule.total_duration == pytest.approx(T2, rel=1e-12)


def test_plan_trivial_for_zero_jprime():
    c = QubitCollection.from_labels(("q0", "q1"))
    plan = plan_switch(c, coeffs(), 1, 0)
    assert plan.schedule.steps == ()
    assert plan.j_target == 1


def test_plan_range_validation():
    c = QubitCollection.from_labels(("q0", "q1"))
    with pytest.raises(ValueError):
        plan_switch(c, coeffs(), 2, 0)
    with pytest.raises(ValueError):
        plan_switch(c, coeffs(), 1, 2)
    with pytest.raises(ValueError):
        plan_switch(c, coeffs(), 0, -1)


def test_flip_convention_is_minus_i_sigma_x():
    layout = SpaceLayout.build(("q0", 2, "qubit"))
    step = ProtocolStep("qubit_flip", ("q0",), 0.0, "x", math.pi)
    h = 0.0 * pauli(layout, "q0", "z")
    out = apply_schedule(PulseSchedule((step,)), h, basis_state(layout))[0]
    np.testing.assert_allclose(out.amplitudes, [0.0, -1j], atol=1e-15)


@pytest.mark.parametrize("n_qubits,j,j_prime", [(2, 1, 1), (4, 2, 1), (4, 2, 2), (6, 3, 2)])
def test_protocol_reaches_target_exactly_on_vacuum(n_qubits, j, j_prime):
    layout = switch_layout(n_qubits)
    c = QubitCollection.from_labels(tuple(f"q{i}" for i in range(n_qubits)))
    plan = plan_switch(c, coeffs(), j, j_prime)
    h = bridge(layout, n_qubits)
    tokens = ["gg"] * j + ["singlet"] * (c.n_pairs - j)
    initial = pair_product_state(layout, c, tokens)
    result = simulate_protocol(plan, h, initial)
    assert all(f == pytest.approx(1.0, abs=1e-11) for f in result["fidelities"])


def test_jz_steps_at_flip_then_stays():
    layout = switch_layout(4)
    c = QubitCollection.from_labels(("q0", "q1", "q2", "q3"))
    plan = plan_switch(c, coeffs(), 2, 1)
    h = bridge(layout, 4)
    initial = pair_product_state(layout, c, ["gg", "gg"])
    result = simulate_protocol(plan, h, initial)
    jz = collective_operator(layout, c, "z")
    timeline = [expectation(jz, s).real for s in result["trajectory"]]
    np.testing.assert_allclose(timeline, [-4.0, -2.0, -2.0, -2.0], atol=1e-9)


def test_round_trip_restores_initial_state():
    layout = switch_layout(2)
    c = QubitCollection.from_labels(("q0", "q1"))
    plan = plan_switch(c, coeffs(), 1, 1)
    h = bridge(layout, 2)
    initial = pair_product_state(layout, c, ["gg"])
    forward = apply_schedule(plan.schedule, h, initial)[-1]
    back = apply_schedule(reversed_schedule(plan), h, forward)[-1]
    assert initial.fidelity(back) == pytest.approx(1.0, abs=1e-11)


def test_reversed_schedule_durations():
    c = QubitCollection.from_labels(("q0", "q1"))
    plan = plan_switch(c, coeffs(), 1, 1)
    steps = reversed_schedule(plan).steps
    assert [s.kind for s in steps] == ["phase_rotation", "free_evolution", "qubit_flip"]
    # the pair phase has period 4*t2, so the inverse evolution runs 3*t2 forward
    assert steps[1].duration == pytest.approx(3 * T2, rel=1e-12)
    assert steps[0].angle == pytest.approx(-plan.schedule.steps[2].angle)


def test_photon_occupation_does_not_disturb_the_switch():
    # the flipped pair sits in the m=0 manifold where photon Stark shifts
    # act as global phases, so the qubit marginal is exact even with a
    # photon superposition in flight
    layout = switch_layout(2)
    c = QubitCollection.from_labels(("q0", "q1"))
    plan = plan_switch(c, coeffs(), 1, 1)
    h = bridge(layout, 2)
    empty = pair_product_state(layout, c, ["gg"])
    single = pair_product_state(layout, c, ["gg"], occupations={"a": 1})
    superposed = StateVector(
        layout, (empty.amplitudes + single.amplitudes) / math.sqrt(2.0)
    )
    result = simulate_protocol(plan, h, superposed)
    assert result["fidelities"][-1] == pytest.approx(1.0, abs=1e-9)


def test_coupling_of_state_tracks_jz():
    layout = switch_layout(2)
    c = QubitCollection.from_labels(("q0", "q1"))
    on = pair_product_state(layout, c, ["gg"])
    off = pair_product_state(layout, c, ["singlet"])
    cf = coeffs()
    assert coupling_of_state(on, cf, c) == pytest.approx(-2.0 * cf.g_ab, rel=1e-12)
    assert coupling_of_state(off, cf, c) == pytest.approx(0.0, abs=1e-15)
    # collection inferred from the layout when omitted
    assert coupling_of_state(on, cf) == pytest.approx(-2.0 * cf.g_ab, rel=1e-12)


def test_coupling_of_state_needs_qubits():
    layout = SpaceLayout.build(("a", 3, "boson"))
    state = basis_state(layout, {"a": 1})
    with pytest.raises(LayoutError):
        coupling_of_state(state, coeffs())
