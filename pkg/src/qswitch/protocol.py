"""Three-step control scheme that retunes a switch between subradiant states.

Starting from |->_j (coupling -2j*g_ab), the schedule flips the first qubit
of j' ground pairs, lets the pair interaction run for a quarter period, and
applies a z rotation that parks each flipped pair in the singlet. The result
is |->_{j-j'} (coupling -2(j-j')*g_ab). Increasing the coupling runs the
time-reverse of the same schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collective import PAIR_VECTORS, collective_operator, pair_product_state
from .errors import LayoutError, ResonanceError
from .operators import (
    TWO_PI,
    SpaceLayout,
    expectation,
    local_operator,
    partial_trace,
    evolve_unitary,
)

_GATE_KINDS = ("qubit_flip", "free_evolution", "phase_rotation")

_PHI_PLUS = PAIR_VECTORS["triplet0"]
_PHI_MINUS = PAIR_VECTORS["singlet"]


@dataclass(frozen=True)
class ProtocolStep:
    """One schedule entry: an instantaneous rotation or a free-evolution span.

    Rotations use the convention U = exp(-i * angle * sigma_axis / 2) applied
    to each target qubit. Gate steps default to duration 0 (ideal gates); a
    positive duration adds free evolution after the gate.
    """

    kind: str
    targets: tuple = ()
    duration: float = 0.0
    axis: str | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in _GATE_KINDS:
            raise ValueError(f"unknown step kind {self.kind!r}")
        if self.duration < 0:
            raise ValueError("step duration must be >= 0")
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.kind == "free_evolution":
            if self.targets or self.axis is not None:
                raise ValueError("free evolution takes no targets or axis")
        else:
            if not self.targets or self.axis not in ("x", "y", "z"):
                raise ValueError(f"{self.kind} needs targets and an x/y/z axis")


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered gate and free-evolution steps."""

    steps: tuple

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def total_duration(self):
        return sum(s.duration for s in self.steps)


@dataclass(frozen=True)
class ProtocolPlan:
    """Schedule plus closed-form target states for one coupling decrease.

    predicted holds psi1 (after the flips), psi2 (after free evolution), and
    psi3_target (the final subradiant state), all on qubit_layout. The final
    gg pairs sit at positions j' .. j-1 of the pair list; the j' singlets
    created by the protocol come first.
    """

    j_initial: int
    j_target: int
    schedule: PulseSchedule
    predicted: dict
    collection: object
    coeffs: object
    t2: float
    qubit_layout: SpaceLayout

    def __post_init__(self):
        n = self.collection.n_pairs
        if not 0 <= self.j_target <= self.j_initial <= n:
            raise ValueError(
                f"need 0 <= j_target <= j_initial <= {n}, "
                f"got {self.j_target}, {self.j_initial}"
            )


def free_evolution_time(coeffs):
    """Quarter-period t2 = pi / (4 * 2*pi * |chi_a + chi_b|), in ns."""
    chi_sum = coeffs.chi_a + coeffs.chi_b
    if chi_sum == 0.0:
        raise ResonanceError("chi_a + chi_b = 0: free-evolution step undefined")
    return math.pi / (4.0 * TWO_PI * abs(chi_sum))


def plan_switch(collection, coeffs, j, j_prime):
    """Plan the decrease |->_j  ->  |->_{j-j'}.

    Parameters
    ----------
    collection : QubitCollection
        The switch qubits, prepared in the canonical |->_j (first j pairs in
        |gg>, the rest singlets).
    coeffs : DispersiveCoefficients
    j, j_prime : int
        Initial subradiant index and the number of pairs to convert.

    Returns
    -------
    ProtocolPlan

    With j' = 0 the schedule is empty. The step-3 rotation angle is
    -sign(chi_a + chi_b) * pi/2 about z, which lands each flipped pair on the
    singlet regardless of the sign of the chi sum.
    """
    n = collection.n_pairs
    if not 0 <= j_prime <= j <= n:
        raise ValueError(f"need 0 <= j' <= j <= {n}, got j'={j_prime}, j={j}")
    chi_sum = coeffs.chi_a + coeffs.chi_b
    t2 = free_evolution_time(coeffs)
    sign = 1.0 if chi_sum > 0 else -1.0

    targets = tuple(collection.pairs[k][0] for k in range(j_prime))
    steps = ()
    if j_prime > 0:
        steps = (
            ProtocolStep("qubit_flip", targets, 0.0, "x", math.pi),
            ProtocolStep("free_evolution", (), t2),
            ProtocolStep("phase_rotation", targets, 0.0, "z", -sign * math.pi / 2.0),
        )
    schedule = PulseSchedule(steps)

    qubit_layout = SpaceLayout.build(*[(q, 2, "qubit") for q in collection.labels])
    rest = ["gg"] * (j - j_prime) + ["singlet"] * (n - j)
    # each flipped pair evolves inside span{phi_plus, phi_minus}
    mid_pair = (np.exp(-1j * sign * math.pi / 2.0) * _PHI_PLUS + _PHI_MINUS) / math.sqrt(2.0)
    predicted = {
        "psi1": pair_product_state(qubit_layout, collection, ["eg"] * j_prime + rest),
        "psi2": pair_product_state(qubit_layout, collection, [mid_pair] * j_prime + rest),
        "psi3_target": pair_product_state(
            qubit_layout, collection, ["singlet"] * j_prime + rest
        ),
    }
    return ProtocolPlan(
        j, j - j_prime, schedule, predicted, collection, coeffs, t2, qubit_layout
    )


def reversed_schedule(plan):
    """Schedule that takes |->_{j-j'} back to |->_j.

    The literal inverse would need a negative-duration evolution; the pair
    phase is periodic with period 4*t2, so forward evolution for 3*t2 stands
    in for it exactly (up to per-pair global phases).
    """
    steps = []
    for step in reversed(plan.schedule.steps):
        if step.kind == "free_evolution":
            steps.append(ProtocolStep("free_evolution", (), 3.0 * plan.t2))
        else:
            steps.append(
                ProtocolStep(step.kind, step.targets, step.duration, step.axis, -step.angle)
            )
    return PulseSchedule(tuple(steps))


def _rotation_matrix(axis, angle):
    paulis = {
        "x": np.array([[0, 1], [1, 0]], dtype=complex),
        "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
        "z": np.array([[-1, 0], [0, 1]], dtype=complex),
    }
    s = paulis[axis]
    return math.cos(angle / 2.0) * np.eye(2) - 1j * math.sin(angle / 2.0) * s


def apply_step(step, hamiltonian, state):
    """Apply one schedule step to a state, evolving under hamiltonian if needed."""
    if step.kind == "free_evolution":
        return evolve_unitary(hamiltonian, step.duration, state)
    gate = _rotation_matrix(step.axis, step.angle)
    u = local_operator(state.layout, {q: gate for q in step.targets})
    out = type(state)(state.layout, u.matrix @ state.amplitudes)
    if step.duration > 0:
        out = evolve_unitary(hamiltonian, step.duration, out)
    return out


def apply_schedule(schedule, hamiltonian, state):
    """Run every step; returns the list of states after each step."""
    states = []
    for step in schedule.steps:
        state = apply_step(step, hamiltonian, state)
        states.append(state)
    return states


def _qubit_fidelity(plan, state, predicted):
    reduced = partial_trace(state, plan.qubit_layout.labels)
    amps = predicted.amplitudes
    return float(np.real(np.vdot(amps, reduced.matrix @ amps)))


def simulate_protocol(plan, hamiltonian, initial):
    """Execute the plan numerically and score each step against its target.

    Parameters
    ----------
    plan : ProtocolPlan
    hamiltonian : Operator
        Full model including resonators; the free-evolution step runs under
        it unchanged, so occupied resonators show up as Stark-shift
        infidelity.
    initial : StateVector
        Consistent with plan.j_initial (switch qubits in |->_j).

    Returns
    -------
    dict with "trajectory" (states after each step, initial first) and
    "fidelities" (per-step overlap with the predicted states, computed on
    the switch-qubit subsystem).
    """
    if hamiltonian.layout != initial.layout:
        raise LayoutError("hamiltonian and initial state live on different layouts")
    order = ("psi1", "psi2", "psi3_target")
    states = apply_schedule(plan.schedule, hamiltonian, initial)
    fidelities = [
        _qubit_fidelity(plan, state, plan.predicted[name])
        for state, name in zip(states, order)
    ]
    return {"trajectory": [initial] + states, "fidelities": fidelities}


def coupling_of_state(state, coeffs, collection=None):
    """Instantaneous exchange strength g_ab * <J^z> for a switch state, GHz."""
    if collection is None:
        from .collective import QubitCollection

        qubits = state.layout.qubit_labels
        if not qubits:
            raise LayoutError("state layout contains no qubits")
        collection = QubitCollection.from_labels(qubits)
    jz = collective_operator(state.layout, collection, "z")
    return coeffs.g_ab * float(np.real(expectation(jz, state)))
