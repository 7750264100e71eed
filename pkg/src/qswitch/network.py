"""Declarative network configs: parse, validate, compile, and simulate.

A config names resonators and the switches bridging them, picks a model,
and carries integrator settings. Compilation produces the composite layout,
Hamiltonian, collapse terms, and initial state; simulation integrates the
master equation, exploiting three exact shortcuts when enabled:

- rotating frame: the Hamiltonian commutes with the total excitation number
  and every collapse operator is phase-covariant, so shifting all mode
  frequencies by a common reference leaves every recorded series unchanged
  while shrinking the eigenvalue spread the integrator has to resolve.
- frozen dark switches: products of |gg> and singlet pairs are eigenstates
  of every switch term and exactly dark under the pairwise dissipators, so
  the resonator sector can be integrated alone with J^z eigenvalues
  substituted into the couplings.
- excitation-sector truncation: when the Hamiltonian conserves the total
  excitation number and every collapse term only lowers or preserves it,
  the density matrix never leaves the sectors at or below the initial
  excitation, and all higher basis states are dropped. The closure is
  verified on the actual matrices before it is used.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse

from .collective import QubitCollection, collective_operator, multi_pair_product_state
from .errors import ConfigError
from .hamiltonians import (
    ResonatorSpec,
    SwitchSpec,
    TransmonSpec,
    bridge_terms,
    build_full_kerr,
    build_jc_reference,
    dispersive_coefficients,
)
from .lindblad import CollapseTerm, integrate, resonator_collapse_terms, switch_collapse_terms
from .operators import (
    TWO_PI,
    DensityMatrix,
    Operator,
    SpaceLayout,
    annihilation,
    identity,
    local_operator,
    number,
)

MODELS = ("dispersive_chain", "full_kerr", "jc_reference")
FREEZE_MODES = ("auto", "on", "off")
_STATE_TOKENS = ("gg", "ee", "singlet")
_JZ_OF_TOKEN = {"gg": -2.0, "ee": 2.0, "singlet": 0.0}


@dataclass(frozen=True)
class SwitchState:
    """Collective state of one switch: subradiant index j or explicit pattern."""

    j: int | None = None
    pattern: tuple | None = None

    def __post_init__(self):
        if (self.j is None) == (self.pattern is None):
            raise ConfigError("switch state needs exactly one of j or pattern")
        if self.pattern is not None:
            object.__setattr__(self, "pattern", tuple(self.pattern))

    def tokens(self, n_pairs):
        """Per-pair tokens, expanding j into the canonical subradiant pattern."""
        if self.j is not None:
            if not 0 <= self.j <= n_pairs:
                raise ConfigError(f"j={self.j} outside [0, {n_pairs}]")
            return ("gg",) * self.j + ("singlet",) * (n_pairs - self.j)
        if len(self.pattern) != n_pairs:
            raise ConfigError(
                f"pattern length {len(self.pattern)} does not match {n_pairs} pairs"
            )
        return self.pattern


@dataclass(frozen=True)
class SwitchConfig:
    """One switch entry: bridged resonators, qubit content, rates, state."""

    label: str
    endpoints: tuple
    n_qubits: int
    omega_q: float
    g: dict
    gamma: float = 0.0
    gamma_phi: float = 0.0
    pair_coupling: float = 0.0
    state: SwitchState = SwitchState(j=0)
    alpha: float | None = None
    levels: int = 2
    chi: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "endpoints", tuple(self.endpoints))
        object.__setattr__(self, "g", dict(self.g))
        if self.chi is not None:
            object.__setattr__(self, "chi", dict(self.chi))

    @property
    def n_pairs(self):
        return self.n_qubits // 2

    @property
    def qubit_labels(self):
        return tuple(f"{self.label}_q{i}" for i in range(1, self.n_qubits + 1))

    @property
    def collection(self):
        return QubitCollection.from_labels(self.qubit_labels)

    def spec(self):
        """SwitchSpec with g_a/g_b following endpoint order."""
        return SwitchSpec(
            self.qubit_labels,
            self.omega_q,
            self.g[self.endpoints[0]],
            self.g[self.endpoints[1]],
            self.gamma,
            self.gamma_phi,
            self.pair_coupling,
        )


@dataclass(frozen=True)
class IntegratorSettings:
    dt_ns: float = 0.01
    t_final_ns: float = 0.0
    sample_every_ns: float | None = None
    rotating_frame: bool = True
    freeze_dark_switches: str = "auto"
    sector_truncation: bool = True
    convergence_check: bool = True


@dataclass(frozen=True)
class Flags:
    odd_qubit_counts_in_jz: bool = False


@dataclass(frozen=True)
class NetworkConfig:
    resonators: tuple
    switches: tuple
    model: str = "dispersive_chain"
    initial: dict = field(default_factory=dict)
    integrator: IntegratorSettings = IntegratorSettings()
    flags: Flags = Flags()

    def __post_init__(self):
        object.__setattr__(self, "resonators", tuple(self.resonators))
        object.__setattr__(self, "switches", tuple(self.switches))
        object.__setattr__(self, "initial", dict(self.initial))

    def resonator(self, label):
        for res in self.resonators:
            if res.label == label:
                return res
        raise ConfigError(f"no resonator labeled {label!r}")

    def switch(self, label):
        for sw in self.switches:
            if sw.label == label:
                return sw
        raise ConfigError(f"no switch labeled {label!r}")


@dataclass(frozen=True)
class CompiledSystem:
    """Everything an integrator needs, on one shared layout."""

    layout: SpaceLayout
    hamiltonian: Operator
    collapses: tuple
    rho0: DensityMatrix
    observables: dict
    metadata: dict


# ---------------------------------------------------------------------------
# parsing and validation

def _req(obj, key, path, diags, types, what):
    if key not in obj:
        diags.append((f"{path}.{key}", f"required {what} missing"))
        return None
    val = obj[key]
    if types is bool:
        if not isinstance(val, bool):
            diags.append((f"{path}.{key}", f"expected {what}"))
            return None
        return val
    if types is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            diags.append((f"{path}.{key}", f"expected {what}"))
            return None
        return float(val)
    if types is int:
        if isinstance(val, bool) or not isinstance(val, int):
            diags.append((f"{path}.{key}", f"expected {what}"))
            return None
        return val
    if not isinstance(val, types):
        diags.append((f"{path}.{key}", f"expected {what}"))
        return None
    return val


def _opt(obj, key, default):
    return obj[key] if key in obj else default


def _reject_unknown(obj, known, path, diags):
    for key in obj:
        if key not in known:
            diags.append((f"{path}.{key}" if path else key, "unknown key"))


def _parse_resonator(obj, path, diags):
    if not isinstance(obj, dict):
        diags.append((path, "expected an object"))
        return None
    _reject_unknown(obj, {"label", "omega_ghz", "fock_dim", "kappa_ghz", "role"}, path, diags)
    label = _req(obj, "label", path, diags, str, "string label")
    omega = _req(obj, "omega_ghz", path, diags, float, "number (GHz)")
    fock_dim = _opt(obj, "fock_dim", 5)
    kappa = _opt(obj, "kappa_ghz", 0.0)
    role = _opt(obj, "role", "storage")
    if label is None or omega is None:
        return None
    try:
        return ResonatorSpec(label, omega, fock_dim, kappa, role)
    except (ConfigError, TypeError) as exc:
        diags.append((path, str(exc)))
        return None


def _parse_state(obj, path, diags):
    if not isinstance(obj, dict):
        diags.append((path, "expected an object with j or pattern"))
        return None
    _reject_unknown(obj, {"j", "pattern"}, path, diags)
    has_j = "j" in obj
    has_pattern = "pattern" in obj
    if has_j == has_pattern:
        diags.append((path, "exactly one of j or pattern required"))
        return None
    if has_j:
        j = _req(obj, "j", path, diags, int, "integer")
        if j is None:
            return None
        if j < 0:
            diags.append((f"{path}.j", "j must be >= 0"))
            return None
        return SwitchState(j=j)
    pattern = obj["pattern"]
    if not isinstance(pattern, list) or not pattern:
        diags.append((f"{path}.pattern", "expected a non-empty array of tokens"))
        return None
    for i, tok in enumerate(pattern):
        if tok not in _STATE_TOKENS:
            diags.append((f"{path}.pattern[{i}]", f"unknown token {tok!r}; use one of {_STATE_TOKENS}"))
            return None
    return SwitchState(pattern=tuple(pattern))


def _parse_switch(obj, path, diags):
    if not isinstance(obj, dict):
        diags.append((path, "expected an object"))
        return None
    known = {
        "label", "endpoints", "n_qubits", "omega_q_ghz", "g_ghz",
        "gamma_ghz", "gamma_phi_ghz", "pair_coupling_ghz", "state",
        "alpha_ghz", "levels", "chi_ghz",
    }
    _reject_unknown(obj, known, path, diags)
    label = _req(obj, "label", path, diags, str, "string label")
    endpoints = _req(obj, "endpoints", path, diags, list, "array of two resonator labels")
    n_qubits = _req(obj, "n_qubits", path, diags, int, "integer")
    omega_q = _req(obj, "omega_q_ghz", path, diags, float, "number (GHz)")
    g = _req(obj, "g_ghz", path, diags, dict, "object {endpoint: GHz}")
    state_obj = _req(obj, "state", path, diags, dict, "object with j or pattern")
    if None in (label, endpoints, n_qubits, omega_q, g, state_obj):
        return None
    if len(endpoints) != 2 or not all(isinstance(e, str) for e in endpoints):
        diags.append((f"{path}.endpoints", "expected exactly two resonator labels"))
        return None
    if endpoints[0] == endpoints[1]:
        diags.append((f"{path}.endpoints", "a switch cannot bridge a resonator to itself"))
        return None
    if set(g) != set(endpoints):
        diags.append((f"{path}.g_ghz", f"keys must be exactly the endpoints {endpoints}"))
        return None
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in g.values()):
        diags.append((f"{path}.g_ghz", "coupling values must be numbers (GHz)"))
        return None
    if n_qubits < 1:
        diags.append((f"{path}.n_qubits", "at least one qubit required"))
        return None
    state = _parse_state(state_obj, f"{path}.state", diags)
    if state is None:
        return None
    if state.j is not None and state.j > n_qubits // 2:
        diags.append((f"{path}.state.j", f"j={state.j} exceeds {n_qubits // 2} pairs"))
        return None
    if state.pattern is not None and len(state.pattern) != n_qubits // 2:
        diags.append(
            (f"{path}.state.pattern", f"need {n_qubits // 2} tokens for n_qubits={n_qubits}")
        )
        return None
    gamma = _opt(obj, "gamma_ghz", 0.0)
    gamma_phi = _opt(obj, "gamma_phi_ghz", 0.0)
    pair_coupling = _opt(obj, "pair_coupling_ghz", 0.0)
    alpha = _opt(obj, "alpha_ghz", None)
    levels = _opt(obj, "levels", 2)
    chi = _opt(obj, "chi_ghz", None)
    if chi is not None and set(chi) != set(endpoints):
        diags.append((f"{path}.chi_ghz", f"keys must be exactly the endpoints {endpoints}"))
        return None
    try:
        return SwitchConfig(
            label, tuple(endpoints), n_qubits, omega_q, {k: float(v) for k, v in g.items()},
            float(gamma), float(gamma_phi), float(pair_coupling), state,
            alpha if alpha is None else float(alpha), levels,
            None if chi is None else {k: float(v) for k, v in chi.items()},
        )
    except (ConfigError, TypeError, ValueError) as exc:
        diags.append((path, str(exc)))
        return None


def _parse_integrator(obj, diags):
    if not isinstance(obj, dict):
        diags.append(("integrator", "expected an object"))
        return IntegratorSettings()
    known = {
        "dt_ns", "t_final_ns", "sample_every_ns", "rotating_frame",
        "freeze_dark_switches", "sector_truncation", "convergence_check",
    }
    _reject_unknown(obj, known, "integrator", diags)
    dt = _opt(obj, "dt_ns", 0.01)
    t_final = _opt(obj, "t_final_ns", 0.0)
    sample = _opt(obj, "sample_every_ns", None)
    frame = _opt(obj, "rotating_frame", True)
    freeze = _opt(obj, "freeze_dark_switches", "auto")
    sector = _opt(obj, "sector_truncation", True)
    check = _opt(obj, "convergence_check", True)
    ok = True
    for name, val in (("dt_ns", dt), ("t_final_ns", t_final)):
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            diags.append((f"integrator.{name}", "expected a number (ns)"))
            ok = False
    if sample is not None and (isinstance(sample, bool) or not isinstance(sample, (int, float))):
        diags.append(("integrator.sample_every_ns", "expected a number (ns)"))
        ok = False
    for name, val in (
        ("rotating_frame", frame),
        ("sector_truncation", sector),
        ("convergence_check", check),
    ):
        if not isinstance(val, bool):
            diags.append((f"integrator.{name}", "expected true or false"))
            ok = False
    if freeze not in FREEZE_MODES:
        diags.append(("integrator.freeze_dark_switches", f"expected one of {FREEZE_MODES}"))
        ok = False
    if not ok:
        return IntegratorSettings()
    if dt <= 0:
        diags.append(("integrator.dt_ns", "must be positive"))
    if t_final < 0:
        diags.append(("integrator.t_final_ns", "must be >= 0"))
    if sample is not None and sample <= 0:
        diags.append(("integrator.sample_every_ns", "must be positive"))
    if t_final > 0 and sample is None:
        diags.append(("integrator.sample_every_ns", "required when t_final_ns > 0"))
    return IntegratorSettings(
        float(dt), float(t_final), None if sample is None else float(sample),
        frame, freeze, sector, check,
    )


def parse_config(text):
    """Parse and validate a JSON config document into a NetworkConfig.

    All problems are collected and reported together in a ConfigError with
    one (field path, message) diagnostic per issue; unknown keys are errors.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("", f"not valid JSON: {exc}")])
    if not isinstance(doc, dict):
        raise ConfigError([("", "top level must be a JSON object")])
    diags = []
    _reject_unknown(
        doc, {"resonators", "switches", "model", "initial", "integrator", "flags"},
        "", diags,
    )

    res_list = doc.get("resonators")
    resonators = []
    if not isinstance(res_list, list) or not res_list:
        diags.append(("resonators", "at least one resonator required"))
    else:
        for i, entry in enumerate(res_list):
            spec = _parse_resonator(entry, f"resonators[{i}]", diags)
            if spec is not None:
                resonators.append(spec)

    sw_list = doc.get("switches", [])
    switches = []
    if not isinstance(sw_list, list):
        diags.append(("switches", "expected an array"))
    else:
        for i, entry in enumerate(sw_list):
            sw = _parse_switch(entry, f"switches[{i}]", diags)
            if sw is not None:
                switches.append(sw)

    model = doc.get("model", "dispersive_chain")
    if model not in MODELS:
        diags.append(("model", f"expected one of {MODELS}"))

    initial = doc.get("initial", {})
    if not isinstance(initial, dict):
        diags.append(("initial", "expected an object {label: Fock index}"))
        initial = {}
    else:
        for key, val in initial.items():
            if isinstance(val, bool) or not isinstance(val, int):
                diags.append((f"initial.{key}", "expected an integer Fock index"))

    integrator = _parse_integrator(doc.get("integrator", {}), diags)

    flags_obj = doc.get("flags", {})
    flags = Flags()
    if not isinstance(flags_obj, dict):
        diags.append(("flags", "expected an object"))
    else:
        _reject_unknown(flags_obj, {"odd_qubit_counts_in_Jz"}, "flags", diags)
        odd = _opt(flags_obj, "odd_qubit_counts_in_Jz", False)
        if not isinstance(odd, bool):
            diags.append(("flags.odd_qubit_counts_in_Jz", "expected true or false"))
        else:
            flags = Flags(odd_qubit_counts_in_jz=odd)

    if diags:
        raise ConfigError(diags)
    config = NetworkConfig(tuple(resonators), tuple(switches), model, initial, integrator, flags)
    diags = validate_config(config)
    if diags:
        raise ConfigError(diags)
    return config


def validate_config(config):
    """Semantic checks beyond field syntax; returns a diagnostics list."""
    diags = []
    labels = [r.label for r in config.resonators]
    if len(set(labels)) != len(labels):
        diags.append(("resonators", "duplicate resonator labels"))
    sw_labels = [s.label for s in config.switches]
    if len(set(sw_labels)) != len(sw_labels):
        diags.append(("switches", "duplicate switch labels"))
    if set(sw_labels) & set(labels):
        diags.append(("switches", "switch labels must not collide with resonator labels"))

    known = set(labels)
    for i, sw in enumerate(config.switches):
        for end in sw.endpoints:
            if end not in known:
                diags.append(
                    (f"switches[{i}].endpoints", f"references missing resonator {end!r}")
                )
    # cycles (and parallel bridges) are out of scope; chains and trees only
    parent = {lab: lab for lab in known}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, sw in enumerate(config.switches):
        if any(end not in known for end in sw.endpoints):
            continue
        ra, rb = (find(e) for e in sw.endpoints)
        if ra == rb:
            diags.append(
                (f"switches[{i}]", "creates a resonator loop; only chains and trees compile")
            )
        else:
            parent[ra] = rb

    if config.model == "jc_reference":
        if len(config.resonators) != 2 or len(config.switches) != 1:
            diags.append(("model", "jc_reference needs exactly 2 resonators and 1 switch"))
    if config.model == "full_kerr":
        if len(config.resonators) != 2:
            diags.append(("model", "full_kerr needs exactly 2 resonators"))
        for i, sw in enumerate(config.switches):
            if sw.alpha is None or sw.chi is None:
                diags.append(
                    (f"switches[{i}]", "full_kerr needs alpha_ghz and chi_ghz per switch")
                )
            if sw.gamma > 0 or sw.gamma_phi > 0:
                diags.append(
                    (f"switches[{i}]",
                     "collective dissipators are defined for two-level switches only; "
                     "set gamma_ghz and gamma_phi_ghz to 0 under full_kerr")
                )
            if sw.levels < 2:
                diags.append((f"switches[{i}].levels", "must be >= 2"))

    for key, val in config.initial.items():
        if key not in known:
            diags.append(("initial", f"references missing resonator {key!r}"))
        elif not 0 <= val < config.resonator(key).fock_dim:
            diags.append(
                (f"initial.{key}",
                 f"Fock index {val} needs fock_dim > {val}, "
                 f"got {config.resonator(key).fock_dim}")
            )
    return diags


def serialize_config(config):
    """Canonical JSON for a NetworkConfig; parse_config inverts it exactly."""
    doc = {
        "resonators": [
            {
                "label": r.label,
                "omega_ghz": r.omega,
                "fock_dim": r.fock_dim,
                "kappa_ghz": r.kappa,
                "role": r.role,
            }
            for r in config.resonators
        ],
        "switches": [],
        "model": config.model,
        "initial": dict(config.initial),
        "integrator": {
            "dt_ns": config.integrator.dt_ns,
            "t_final_ns": config.integrator.t_final_ns,
            "rotating_frame": config.integrator.rotating_frame,
            "freeze_dark_switches": config.integrator.freeze_dark_switches,
            "sector_truncation": config.integrator.sector_truncation,
            "convergence_check": config.integrator.convergence_check,
        },
        "flags": {"odd_qubit_counts_in_Jz": config.flags.odd_qubit_counts_in_jz},
    }
    if config.integrator.sample_every_ns is not None:
        doc["integrator"]["sample_every_ns"] = config.integrator.sample_every_ns
    for sw in config.switches:
        entry = {
            "label": sw.label,
            "endpoints": list(sw.endpoints),
            "n_qubits": sw.n_qubits,
            "omega_q_ghz": sw.omega_q,
            "g_ghz": {end: sw.g[end] for end in sw.endpoints},
            "gamma_ghz": sw.gamma,
            "gamma_phi_ghz": sw.gamma_phi,
            "pair_coupling_ghz": sw.pair_coupling,
            "state": {"j": sw.state.j} if sw.state.j is not None
            else {"pattern": list(sw.state.pattern)},
        }
        if sw.alpha is not None:
            entry["alpha_ghz"] = sw.alpha
        if sw.levels != 2:
            entry["levels"] = sw.levels
        if sw.chi is not None:
            entry["chi_ghz"] = {end: sw.chi[end] for end in sw.endpoints}
        doc["switches"].append(entry)
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# config surgery helpers

def with_switch_state(config, label, state):
    switches = tuple(
        replace(sw, state=state) if sw.label == label else sw for sw in config.switches
    )
    return replace(config, switches=switches)


def with_switch_qubit_count(config, n_qubits):
    switches = tuple(replace(sw, n_qubits=n_qubits) for sw in config.switches)
    return replace(config, switches=switches)


def all_ground_state(switch):
    """All qubits in |g>: the fully coupled J^z eigenstate."""
    return SwitchState(pattern=("gg",) * switch.n_pairs)


def off_state(switch):
    """j=0 subradiant product: every pair a singlet, coupling off."""
    return SwitchState(j=0)


# ---------------------------------------------------------------------------
# compilation

def _edge_coefficients(config, switch):
    left, right = switch.endpoints
    res_l = config.resonator(left)
    res_r = config.resonator(right)
    return dispersive_coefficients(
        switch.g[left], switch.g[right],
        switch.omega_q - res_l.omega, switch.omega_q - res_r.omega,
    )


def frozen_jz_value(config, switch):
    """J^z eigenvalue of the switch state, or None if it is not frozen-dark.

    Frozen-dark means every pair is |gg> or a singlet (an |ee> pair also
    qualifies when the switch has no energy relaxation); the odd tail qubit
    rests in |g> and contributes -1 only under the inclusive-J^z flag.
    """
    tokens = switch.state.tokens(switch.n_pairs)
    value = 0.0
    for tok in tokens:
        if tok not in _JZ_OF_TOKEN:
            return None
        if tok == "ee" and switch.gamma > 0:
            return None
        value += _JZ_OF_TOKEN[tok]
    if switch.n_qubits % 2 and config.flags.odd_qubit_counts_in_jz:
        value -= 1.0
    return value


def static_jz_value(config, switch):
    """J^z eigenvalue of the switch state for coupling bookkeeping."""
    tokens = switch.state.tokens(switch.n_pairs)
    value = 0.0
    for tok in tokens:
        if tok not in _JZ_OF_TOKEN:
            raise ConfigError(
                f"switch {switch.label!r} state is not a J^z eigenstate; "
                "run dynamics instead of the static table"
            )
        value += _JZ_OF_TOKEN[tok]
    if switch.n_qubits % 2 and config.flags.odd_qubit_counts_in_jz:
        value -= 1.0
    return value


def _build_layout(config):
    specs = [(r.label, r.fock_dim, "boson") for r in config.resonators]
    qubit_dim = 2
    for sw in config.switches:
        dim = sw.levels if config.model == "full_kerr" else qubit_dim
        kind = "boson" if config.model == "full_kerr" else "qubit"
        specs.extend((q, dim, kind) for q in sw.qubit_labels)
    return SpaceLayout.build(*specs)


def _initial_state(config, layout):
    assignments = [
        (sw.collection, list(sw.state.tokens(sw.n_pairs))) for sw in config.switches
    ]
    return multi_pair_product_state(layout, assignments, occupations=config.initial)


def _switch_observables(config, layout):
    obs = {}
    for sw in config.switches:
        if config.model == "full_kerr":
            continue
        obs[f"Jz_{sw.label}"] = collective_operator(
            layout, sw.collection, "z",
            include_odd=config.flags.odd_qubit_counts_in_jz and sw.n_qubits % 2 == 1,
        )
    return obs


def compile_network(config):
    """Build the composite system for a validated config.

    The layout holds resonators in declaration order followed by each
    switch's qubits; collapse terms are kappa*D[a] per resonator and the
    pairwise (gamma/2) D[J^-], (gamma_phi/2) D[J^z] channels per switch.
    """
    diags = validate_config(config)
    if diags:
        raise ConfigError(diags)
    layout = _build_layout(config)
    metadata = {"model": config.model}

    if config.model == "dispersive_chain":
        h = None
        for res in config.resonators:
            term = (TWO_PI * res.omega) * number(layout, res.label)
            h = term if h is None else h + term
        for sw in config.switches:
            coeffs = _edge_coefficients(config, sw)
            left, right = sw.endpoints
            include_odd = config.flags.odd_qubit_counts_in_jz and sw.n_qubits % 2 == 1
            h = h + bridge_terms(
                layout, config.resonator(left), config.resonator(right),
                sw.spec(), coeffs, include_odd,
            )
    elif config.model == "jc_reference":
        sw = config.switches[0]
        ends = tuple(config.resonator(e) for e in sw.endpoints)
        h = build_jc_reference(layout, ends, sw.spec())
    else:  # full_kerr
        transmons = []
        pair_couplings = []
        for sw in config.switches:
            left, right = sw.endpoints
            for q in sw.qubit_labels:
                transmons.append(
                    TransmonSpec(q, sw.omega_q, sw.alpha, sw.levels,
                                 sw.chi[left], sw.chi[right])
                )
            if sw.pair_coupling != 0.0:
                pair_couplings.extend(
                    (q1, q2, sw.pair_coupling) for q1, q2 in sw.collection.pairs
                )
        h = build_full_kerr(layout, config.resonators, transmons, pair_couplings)

    collapses = list(resonator_collapse_terms(layout, config.resonators))
    if config.model != "full_kerr":
        for sw in config.switches:
            collapses.extend(switch_collapse_terms(layout, sw.spec()))

    rho0 = _initial_state(config, layout).to_density()
    observables = {f"n_{r.label}": number(layout, r.label) for r in config.resonators}
    observables.update(_switch_observables(config, layout))
    return CompiledSystem(layout, h, tuple(collapses), rho0, observables, metadata)


# ---------------------------------------------------------------------------
# effective couplings

def _adjacency(config):
    edges = {}
    for sw in config.switches:
        edges.setdefault(sw.endpoints[0], []).append(sw)
        edges.setdefault(sw.endpoints[1], []).append(sw)
    return edges


def chain_order(config):
    """Resonators in path order if the network is a simple chain, else None."""
    if not config.switches:
        return tuple(config.resonators) if len(config.resonators) == 1 else None
    adjacency = _adjacency(config)
    degrees = {r.label: len(adjacency.get(r.label, [])) for r in config.resonators}
    ends = [lab for lab, d in degrees.items() if d == 1]
    if len(ends) != 2 or any(d not in (1, 2) for d in degrees.values()):
        return None
    if len(config.switches) != len(config.resonators) - 1:
        return None
    start = next(r.label for r in config.resonators if r.label in ends)
    order = [start]
    used = set()
    while len(order) < len(config.resonators):
        here = order[-1]
        step = None
        for sw in adjacency.get(here, []):
            if sw.label in used:
                continue
            other = sw.endpoints[1] if sw.endpoints[0] == here else sw.endpoints[0]
            step = other
            used.add(sw.label)
            break
        if step is None:
            return None
        order.append(step)
    return tuple(config.resonator(lab) for lab in order)


def _path_between(config, start, goal):
    adjacency = _adjacency(config)
    stack = [(start, [], set())]
    while stack:
        here, edges_taken, visited = stack.pop()
        if here == goal:
            return edges_taken
        visited = visited | {here}
        for sw in adjacency.get(here, []):
            other = sw.endpoints[1] if sw.endpoints[0] == here else sw.endpoints[0]
            if other in visited:
                continue
            stack.append((other, edges_taken + [(sw, here, other)], visited))
    return None


def effective_coupling_table(config):
    """Pairwise effective exchange strengths in GHz, switches frozen.

    Adjacent resonator pairs report g_edge * <J^z>; storage pairs joined by
    an all-bus path report the end-to-end coefficient
    prod(g_edges) / Delta_sb^(edges-1) times the product of <J^z> values.
    Requires every switch state to be a J^z eigenstate.
    """
    diags = validate_config(config)
    if diags:
        raise ConfigError(diags)
    jz = {sw.label: static_jz_value(config, sw) for sw in config.switches}
    table = {}
    for sw in config.switches:
        coeffs = _edge_coefficients(config, sw)
        table[sw.endpoints] = coeffs.g_ab * jz[sw.label]

    storages = [r for r in config.resonators if r.role == "storage"]
    for i, ra in enumerate(storages):
        for rb in storages[i + 1:]:
            path = _path_between(config, ra.label, rb.label)
            if path is None or len(path) < 2:
                continue
            inner = [config.resonator(here) for _, here, _ in path[1:]]
            if any(r.role != "bus" for r in inner):
                continue
            if abs(ra.omega - rb.omega) > 1e-12:
                continue
            bus_omegas = {r.omega for r in inner}
            if len(bus_omegas) != 1:
                continue
            delta_sb = ra.omega - inner[0].omega
            if delta_sb == 0.0:
                continue
            value = 1.0
            for sw, _, _ in path:
                value *= _edge_coefficients(config, sw).g_ab * jz[sw.label]
            value /= delta_sb ** (len(path) - 1)
            table[(ra.label, rb.label)] = value
    return table


# ---------------------------------------------------------------------------
# simulation

def _excitation_number_operator(layout):
    """Total excitation number: photon numbers plus qubit occupations."""
    total = None
    for sub in layout.subsystems:
        if sub.kind == "boson":
            term = number(layout, sub.label)
        else:
            term = local_operator(layout, {sub.label: np.diag([0.0, 1.0])})
        total = term if total is None else total + term
    return total


def _sector_restriction(layout, hamiltonian, collapses, rho0, observables):
    """Exact restriction to the excitation sectors the initial state can reach.

    Keeps the basis states whose total excitation number does not exceed the
    largest value supported by rho0, provided the Hamiltonian, every collapse
    operator, and every X^dag X leave that set closed (no matrix element from
    a kept column to a dropped row). Observables need no condition: the
    density matrix vanishes outside the kept block, so traces against any
    operator only see the kept entries. Returns None when nothing is saved
    or the closure check fails.
    """
    n_diag = np.real(np.asarray(_excitation_number_operator(layout).matrix.diagonal()))
    rho = rho0.matrix
    support = np.abs(rho).sum(axis=1) > 0.0
    if not support.any():
        return None
    mask = n_diag <= float(np.max(n_diag[support])) + 1e-9
    if mask.all():
        return None

    drop = ~mask

    def leaks(mat):
        if sparse.issparse(mat):
            return mat.tocsr()[drop][:, mask].count_nonzero() > 0
        return bool(np.any(mat[np.ix_(drop, mask)] != 0.0))

    to_check = [hamiltonian.matrix]
    for term in collapses:
        x = term.operator.matrix
        to_check.append(x)
        to_check.append(x.conj().T @ x)
    if any(leaks(mat) for mat in to_check):
        return None

    kept = int(np.count_nonzero(mask))
    sector_layout = SpaceLayout.build(("sector", kept, "sector"))

    def cut(mat):
        if sparse.issparse(mat):
            return mat.tocsr()[mask][:, mask]
        return mat[np.ix_(mask, mask)]

    h_s = Operator(sector_layout, cut(hamiltonian.matrix))
    collapses_s = [
        CollapseTerm(Operator(sector_layout, cut(t.operator.matrix)), t.rate, t.label)
        for t in collapses
    ]
    rho_s = DensityMatrix(sector_layout, np.asarray(cut(rho)))
    obs_s = {
        lab: Operator(sector_layout, cut(op.matrix)) for lab, op in observables.items()
    }
    info = {
        "kept_dim": kept,
        "full_dim": layout.total_dim,
        "max_excitation": float(np.max(n_diag[support])),
    }
    return sector_layout, h_s, collapses_s, rho_s, obs_s, info


def _reduction_plan(config):
    """Frozen J^z values per switch, or None when reduction does not apply."""
    mode = config.integrator.freeze_dark_switches
    if mode == "off" or config.model != "dispersive_chain":
        if mode == "on" and config.model != "dispersive_chain":
            raise ConfigError(
                "freeze_dark_switches=on requires the dispersive_chain model"
            )
        return None
    values = {}
    for sw in config.switches:
        val = frozen_jz_value(config, sw)
        if val is None:
            if mode == "on":
                raise ConfigError(
                    f"switch {sw.label!r} state is not frozen-dark; "
                    "set freeze_dark_switches=auto or off"
                )
            return None
        values[sw.label] = val
    return values


def _compile_reduced(config, jz_values):
    layout = SpaceLayout.build(
        *[(r.label, r.fock_dim, "boson") for r in config.resonators]
    )
    h = None
    for res in config.resonators:
        term = (TWO_PI * res.omega) * number(layout, res.label)
        h = term if h is None else h + term
    dropped = 0.0
    for sw in config.switches:
        coeffs = _edge_coefficients(config, sw)
        jz_val = jz_values[sw.label]
        dropped += 0.5 * sw.omega_q * jz_val
        left, right = sw.endpoints
        if jz_val != 0.0:
            n_l = number(layout, left)
            n_r = number(layout, right)
            a_l = annihilation(layout, left)
            a_r = annihilation(layout, right)
            h = h + (TWO_PI * jz_val) * (
                coeffs.chi_a * n_l + coeffs.chi_b * n_r
                + coeffs.g_ab * (a_l @ a_r.dag() + a_l.dag() @ a_r)
            )
    collapses = tuple(resonator_collapse_terms(layout, config.resonators))
    rho0_vec = multi_pair_product_state(layout, [], occupations=config.initial)
    observables = {f"n_{r.label}": number(layout, r.label) for r in config.resonators}
    eye = identity(layout)
    for sw in config.switches:
        observables[f"Jz_{sw.label}"] = jz_values[sw.label] * eye
    metadata = {
        "model": config.model,
        "reduced": True,
        "frozen_jz": dict(jz_values),
        "dropped_constant_ghz": dropped,
    }
    return CompiledSystem(layout, h, collapses, rho0_vec.to_density(), observables, metadata)


def simulate_network(config):
    """Integrate a config end to end and return the sampled Trajectory.

    Applies the rotating-frame shift and the frozen-dark-switch reduction
    when the integrator settings allow them; both leave every recorded
    observable unchanged (the frame commutes with all recorded operators,
    and frozen switch sectors factor out exactly).
    """
    jz_values = _reduction_plan(config)
    if jz_values is not None:
        system = _compile_reduced(config, jz_values)
    else:
        system = compile_network(config)

    h = system.hamiltonian
    nu_ref = None
    if config.integrator.rotating_frame and config.resonators:
        nu_ref = config.resonators[0].omega
        h = h - (TWO_PI * nu_ref) * _excitation_number_operator(system.layout)

    collapses = system.collapses
    rho0 = system.rho0
    observables = system.observables
    sector_info = None
    if config.integrator.sector_truncation:
        restricted = _sector_restriction(system.layout, h, collapses, rho0, observables)
        if restricted is not None:
            _, h, collapses, rho0, observables, sector_info = restricted

    settings = config.integrator
    if settings.t_final_ns <= 0:
        t_grid = np.array([0.0])
    else:
        n_samples = int(np.floor(settings.t_final_ns / settings.sample_every_ns + 1e-9))
        t_grid = np.arange(n_samples + 1) * settings.sample_every_ns
        if t_grid[-1] < settings.t_final_ns - 1e-9 * settings.t_final_ns:
            t_grid = np.append(t_grid, settings.t_final_ns)

    trajectory = integrate(
        h, collapses, rho0, t_grid, observables,
        dt=settings.dt_ns, convergence_check=settings.convergence_check,
    )
    trajectory.metadata.update(system.metadata)
    trajectory.metadata["rotating_frame_ghz"] = nu_ref
    trajectory.metadata["sector_truncation"] = sector_info
    trajectory.metadata["integrator_settings"] = {
        "dt_ns": settings.dt_ns,
        "t_final_ns": settings.t_final_ns,
        "sample_every_ns": settings.sample_every_ns,
        "rotating_frame": settings.rotating_frame,
        "freeze_dark_switches": settings.freeze_dark_switches,
        "sector_truncation": settings.sector_truncation,
        "convergence_check": settings.convergence_check,
    }
    return trajectory
