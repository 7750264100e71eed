"""Tunable coupling between superconducting resonators via collective qubit pairs.

The package models resonator networks bridged by small ensembles of qubit
pairs. Preparing pairs in singlets turns the mediated exchange off; ground
state pairs turn it on. Modules: operators (tensor-product algebra),
collective (pair states and collective spin operators), hamiltonians
(dispersive and full models), protocol (the three-step switching scheme),
lindblad (master-equation integrator), network (config-driven chains),
analysis (rate extraction), cli (command-line front end).
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    DispersiveValidityWarning,
    LayoutError,
    QSwitchError,
    ResonanceError,
    TruncationWarning,
)
from .operators import (
    DensityMatrix,
    Operator,
    SpaceLayout,
    StateVector,
    Subsystem,
    annihilation,
    basis_state,
    commutator,
    creation,
    evolve_unitary,
    expectation,
    local_operator,
    number,
    partial_trace,
    pauli,
    product_state,
    projector,
)
from .collective import (
    PAIR_VECTORS,
    CollectiveQuantumNumbers,
    QubitCollection,
    collective_operator,
    dicke_state,
    multi_pair_product_state,
    pair_product_state,
    subradiant_state,
)
from .hamiltonians import (
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
from .protocol import (
    ProtocolPlan,
    ProtocolStep,
    PulseSchedule,
    apply_schedule,
    coupling_of_state,
    free_evolution_time,
    plan_switch,
    reversed_schedule,
    simulate_protocol,
)
from .lindblad import (
    CollapseTerm,
    Trajectory,
    figure4_experiment,
    integrate,
    resonator_collapse_terms,
    switch_collapse_terms,
)
from .network import (
    IntegratorSettings,
    NetworkConfig,
    SwitchConfig,
    SwitchState,
    all_ground_state,
    chain_order,
    compile_network,
    effective_coupling_table,
    off_state,
    parse_config,
    serialize_config,
    simulate_network,
    validate_config,
    with_switch_qubit_count,
    with_switch_state,
)

__version__ = "0.1.0"

__all__ = [
    "CollapseTerm",
    "CollectiveQuantumNumbers",
    "ConfigError",
    "ConvergenceError",
    "DensityMatrix",
    "DispersiveCoefficients",
    "DispersiveValidityWarning",
    "IntegratorSettings",
    "LayoutError",
    "NetworkConfig",
    "Operator",
    "PAIR_VECTORS",
    "ProtocolPlan",
    "ProtocolStep",
    "PulseSchedule",
    "QSwitchError",
    "QubitCollection",
    "ResonanceError",
    "ResonatorSpec",
    "SpaceLayout",
    "StateVector",
    "Subsystem",
    "SwitchConfig",
    "SwitchSpec",
    "SwitchState",
    "Trajectory",
    "TransmonSpec",
    "TruncationWarning",
    "all_ground_state",
    "annihilation",
    "apply_schedule",
    "basis_state",
    "bridge_terms",
    "build_chain_dispersive",
    "build_dispersive",
    "build_full_kerr",
    "build_jc_reference",
    "chain_order",
    "collective_operator",
    "commutator",
    "compile_network",
    "coupling_of_state",
    "creation",
    "dicke_state",
    "dispersive_coefficients",
    "distant_coupling",
    "effective_coupling_table",
    "evolve_unitary",
    "expectation",
    "figure4_experiment",
    "free_evolution_time",
    "integrate",
    "local_operator",
    "multi_pair_product_state",
    "number",
    "off_state",
    "pair_product_state",
    "parse_config",
    "partial_trace",
    "pauli",
    "plan_switch",
    "product_state",
    "projector",
    "resonator_collapse_terms",
    "reversed_schedule",
    "serialize_config",
    "simulate_network",
    "simulate_protocol",
    "storage_effective",
    "subradiant_state",
    "switch_collapse_terms",
    "validate_config",
    "with_switch_qubit_count",
    "with_switch_state",
]
