"""Hamiltonian builders for resonator chains mediated by qubit-pair switches.

All frequency parameters are plain GHz; builders multiply by 2*pi once so the
returned operators are in rad/ns. Every builder output is hermitian by
construction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .collective import QubitCollection, collective_operator
from .errors import ConfigError, DispersiveValidityWarning, LayoutError, ResonanceError
from .operators import TWO_PI, annihilation, number, pauli

DISPERSIVE_RATIO = 10.0

_ROLES = ("storage", "bus")


@dataclass(frozen=True)
class ResonatorSpec:
    """One resonator mode: label in the layout, frequency, truncation, decay."""

    label: str
    omega: float
    fock_dim: int = 5
    kappa: float = 0.0
    role: str = "storage"

    def __post_init__(self):
        if self.fock_dim < 2:
            raise ConfigError(f"resonator {self.label!r}: fock_dim must be >= 2")
        if self.kappa < 0:
            raise ConfigError(f"resonator {self.label!r}: kappa must be >= 0")
        if self.role not in _ROLES:
            raise ConfigError(f"resonator {self.label!r}: role must be one of {_ROLES}")


@dataclass(frozen=True)
class SwitchSpec:
    """One switch: its qubit labels plus shared frequency, couplings, and rates.

    g_a couples every qubit to the first bridged resonator, g_b to the second.
    gamma is the collective energy relaxation rate, gamma_phi the collective
    dephasing rate, pair_coupling the intra-pair exchange strength.
    """

    qubit_labels: tuple
    omega_q: float
    g_a: float
    g_b: float
    gamma: float = 0.0
    gamma_phi: float = 0.0
    pair_coupling: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "qubit_labels", tuple(self.qubit_labels))
        if len(self.qubit_labels) < 1:
            raise ConfigError("switch needs at least one qubit label")
        if self.gamma < 0 or self.gamma_phi < 0:
            raise ConfigError("switch rates must be >= 0")

    @property
    def qubit_count(self):
        return len(self.qubit_labels)

    @property
    def collection(self):
        return QubitCollection.from_labels(self.qubit_labels)


@dataclass(frozen=True)
class TransmonSpec:
    """Multi-level transmon mode for the Kerr-type model."""

    label: str
    omega: float
    alpha: float
    levels: int = 3
    chi_a: float = 0.0
    chi_b: float = 0.0

    def __post_init__(self):
        if self.levels < 2:
            raise ConfigError(f"transmon {self.label!r}: levels must be >= 2")


@dataclass(frozen=True)
class DispersiveCoefficients:
    """Coefficients of the dispersive model for one switch.

    When the underlying couplings g_a, g_b are supplied, construction checks
    chi = g^2/delta and the g_ab formula to 1e-12.
    """

    chi_a: float
    chi_b: float
    g_ab: float
    delta_a: float
    delta_b: float
    g_a: float | None = None
    g_b: float | None = None

    def __post_init__(self):
        if self.g_a is not None and self.g_b is not None:
            if abs(self.chi_a * self.delta_a - self.g_a**2) > 1e-12:
                raise ConfigError("chi_a*delta_a does not equal g_a^2")
            if abs(self.chi_b * self.delta_b - self.g_b**2) > 1e-12:
                raise ConfigError("chi_b*delta_b does not equal g_b^2")
            expected = (
                self.g_a
                * self.g_b
                * (self.delta_a + self.delta_b)
                / (2.0 * self.delta_a * self.delta_b)
            )
            if abs(self.g_ab - expected) > 1e-12:
                raise ConfigError("g_ab inconsistent with g_a*g_b*(da+db)/(2*da*db)")


def dispersive_coefficients(g_a, g_b, delta_a, delta_b):
    """Second-order coefficients chi_a, chi_b, g_ab from couplings and detunings.

    Parameters
    ----------
    g_a, g_b : float
        Qubit coupling to the first and second resonator, GHz.
    delta_a, delta_b : float
        Qubit-resonator detunings omega_q - omega_r, GHz. Must be nonzero.

    Returns
    -------
    DispersiveCoefficients

    Raises
    ------
    ResonanceError
        If either detuning is zero.

    Warns with DispersiveValidityWarning when |delta|/|g| drops below 10.
    """
    if delta_a == 0.0 or delta_b == 0.0:
        raise ResonanceError("zero qubit-resonator detuning: dispersive formulas invalid")
    for g, delta, name in ((g_a, delta_a, "a"), (g_b, delta_b, "b")):
        # the boundary ratio itself is considered dispersive, hence the slack
        if g != 0.0 and abs(delta / g) < DISPERSIVE_RATIO * (1.0 - 1e-9):
            warnings.warn(
                f"|delta_{name}|/|g_{name}| = {abs(delta / g):.2f} < {DISPERSIVE_RATIO:g}; "
                "dispersive approximation degrades",
                DispersiveValidityWarning,
                stacklevel=2,
            )
    chi_a = g_a**2 / delta_a
    chi_b = g_b**2 / delta_b
    g_ab = g_a * g_b * (delta_a + delta_b) / (2.0 * delta_a * delta_b)
    return DispersiveCoefficients(chi_a, chi_b, g_ab, delta_a, delta_b, g_a, g_b)


def _check_mode(layout, spec_label, fock_dim):
    sub = layout.subsystem(spec_label)
    if sub.kind != "boson":
        raise LayoutError(f"{spec_label!r} is not a bosonic mode in the layout")
    if sub.dim != fock_dim:
        raise LayoutError(
            f"{spec_label!r}: layout dimension {sub.dim} != spec fock_dim {fock_dim}"
        )


def _bare_resonators(layout, resonators):
    total = None
    for res in resonators:
        _check_mode(layout, res.label, res.fock_dim)
        term = (TWO_PI * res.omega) * number(layout, res.label)
        total = term if total is None else total + term
    return total


def bridge_terms(layout, res_left, res_right, switch, coeffs, include_odd_in_jz=False):
    """Every term one switch adds between two resonators.

    Covers the switch's bare qubit energy, the photon-number Stark shifts,
    the J^z-scaled exchange between the bridged resonators, and the pairwise
    J^{+-} interaction. Summing bridge_terms over the edges of a chain or
    tree plus the bare resonator energies gives the full model.
    """
    col = switch.collection
    jz = collective_operator(layout, col, "z", include_odd=include_odd_in_jz)
    jpm = collective_operator(layout, col, "pm")
    n_l = number(layout, res_left.label)
    n_r = number(layout, res_right.label)
    a_l = annihilation(layout, res_left.label)
    a_r = annihilation(layout, res_right.label)
    hop = a_l @ a_r.dag() + a_l.dag() @ a_r
    block = (
        (0.5 * switch.omega_q) * jz
        + coeffs.chi_a * (n_l @ jz)
        + coeffs.chi_b * (n_r @ jz)
        + coeffs.g_ab * (hop @ jz)
        + (coeffs.chi_a + coeffs.chi_b) * jpm
    )
    return TWO_PI * block


def build_dispersive(layout, resonators, switch, coeffs, include_odd_in_jz=False):
    """Two resonators exchange-coupled through one switch.

    H = w_a n_a + w_b n_b + (1/2)(w_q + 2 chi_a n_a + 2 chi_b n_b) J^z
        + g_ab (a b^+ + a^+ b) J^z + (chi_a + chi_b) J^{+-}, all times 2*pi.

    The J^z eigenvalue of the switch state scales the exchange term, so the
    coupling runs from -N*g_ab (all qubits ground) through zero (j=0
    subradiant states).
    """
    resonators = tuple(resonators)
    if len(resonators) != 2:
        raise LayoutError(f"expected 2 resonators, got {len(resonators)}")
    h = _bare_resonators(layout, resonators)
    h = h + bridge_terms(
        layout, resonators[0], resonators[1], switch, coeffs, include_odd_in_jz
    )
    return h


def build_chain_dispersive(
    layout, resonators, switches, coeffs, endpoints=None, include_odd_in_jz=False
):
    """Chain of m resonators with switch k bridging resonators k and k+1.

    Parameters
    ----------
    resonators : sequence of ResonatorSpec, length m >= 2
    switches : sequence of SwitchSpec, length m - 1
    coeffs : sequence of DispersiveCoefficients, one per switch
    endpoints : optional sequence of (left label, right label) per switch.
        When given, each pair must name adjacent resonators in chain order;
        anything else is rejected (general graphs go through the network
        compiler, not this builder).

    Returns the sum of bare resonator terms and one switch block per bridge.
    With two resonators the result equals build_dispersive exactly.
    """
    resonators = tuple(resonators)
    switches = tuple(switches)
    coeffs = tuple(coeffs)
    m = len(resonators)
    if m < 2:
        raise LayoutError(f"chain needs at least 2 resonators, got {m}")
    if len(switches) != m - 1 or len(coeffs) != m - 1:
        raise LayoutError(
            f"chain of {m} resonators needs {m - 1} switches and coefficient sets"
        )
    if endpoints is not None:
        endpoints = tuple(tuple(e) for e in endpoints)
        if len(endpoints) != m - 1:
            raise LayoutError("one endpoint pair per switch required")
        for k, (left, right) in enumerate(endpoints):
            want = (resonators[k].label, resonators[k + 1].label)
            if (left, right) != want:
                raise LayoutError(
                    f"switch {k} bridges {(left, right)}, expected adjacent pair {want}"
                )
    h = _bare_resonators(layout, resonators)
    for k, (sw, cf) in enumerate(zip(switches, coeffs)):
        h = h + bridge_terms(
            layout, resonators[k], resonators[k + 1], sw, cf, include_odd_in_jz
        )
    return h


def build_jc_reference(layout, resonators, switch):
    """Excitation-exchange reference model underneath the dispersive one.

    H = w_a n_a + w_b n_b + sum_k (w_q/2) sigma_k^z
        + sum_k [g_a (a sigma_k^+ + a^+ sigma_k^-) + g_b (...)], times 2*pi.

    Used to validate dispersive predictions numerically; not derived from the
    Kerr-type model.
    """
    resonators = tuple(resonators)
    if len(resonators) != 2:
        raise LayoutError(f"expected 2 resonators, got {len(resonators)}")
    h = _bare_resonators(layout, resonators)
    ops = {
        res.label: annihilation(layout, res.label) for res in resonators
    }
    a, b = (ops[res.label] for res in resonators)
    g_by_mode = ((a, switch.g_a), (b, switch.g_b))
    for q in switch.qubit_labels:
        sz = pauli(layout, q, "z")
        sp = pauli(layout, q, "plus")
        sm = pauli(layout, q, "minus")
        h = h + (TWO_PI * 0.5 * switch.omega_q) * sz
        for mode, g in g_by_mode:
            if g != 0.0:
                h = h + (TWO_PI * g) * (mode @ sp + mode.dag() @ sm)
    return h


def build_full_kerr(layout, resonators, transmons, pair_couplings=()):
    """Kerr-type model: bare modes, transmon self-Kerr, cross-Kerr, pair exchange.

    H = sum_r w_r n_r + sum_k [w_k n_k + (alpha_k/2) c_k^+2 c_k^2
        + chi_a n_a n_k + chi_b n_b n_k]
        + sum_pairs K (c c'^+ + c^+ c'), all times 2*pi.

    pair_couplings lists (label, label, K) triples; K defaults to zero
    elsewhere because no numeric value is established for it.
    """
    resonators = tuple(resonators)
    if len(resonators) != 2:
        raise LayoutError(f"expected 2 resonators, got {len(resonators)}")
    h = _bare_resonators(layout, resonators)
    n_a = number(layout, resonators[0].label)
    n_b = number(layout, resonators[1].label)
    for t in transmons:
        _check_mode(layout, t.label, t.levels)
        c = annihilation(layout, t.label)
        cd = c.dag()
        n_c = number(layout, t.label)
        h = h + (TWO_PI * t.omega) * n_c
        if t.alpha != 0.0:
            h = h + (TWO_PI * t.alpha / 2.0) * (cd @ cd @ c @ c)
        if t.chi_a != 0.0:
            h = h + (TWO_PI * t.chi_a) * (n_a @ n_c)
        if t.chi_b != 0.0:
            h = h + (TWO_PI * t.chi_b) * (n_b @ n_c)
    for label_1, label_2, k_pair in pair_couplings:
        if k_pair == 0.0:
            continue
        c1 = annihilation(layout, label_1)
        c2 = annihilation(layout, label_2)
        h = h + (TWO_PI * k_pair) * (c1 @ c2.dag() + c1.dag() @ c2)
    return h


def storage_effective(layout, resonators, switches, coeffs, include_odd_in_jz=False):
    """Effective model for two storage resonators coupled through a bus.

    Requires resonators (storage, bus, storage) with both storages at the
    same frequency and a nonzero storage-bus detuning. Produces the bare
    terms, the J^z-dependent Stark shifts with their +/- g^2/Delta_sb * J^z
    corrections, and the distant-exchange term
    (g_12 g_23 / Delta_sb)(a_1^+ a_3 + a_1 a_3^+) J_1^z J_2^z.
    """
    resonators = tuple(resonators)
    switches = tuple(switches)
    coeffs = tuple(coeffs)
    if len(resonators) != 3 or len(switches) != 2 or len(coeffs) != 2:
        raise LayoutError("storage-bus-storage model needs 3 resonators and 2 switches")
    r1, r2, r3 = resonators
    if r1.role != "storage" or r3.role != "storage" or r2.role != "bus":
        raise ConfigError("expected roles (storage, bus, storage)")
    if abs(r1.omega - r3.omega) > 1e-12:
        raise ConfigError("storage resonators must be degenerate")
    delta_sb = r1.omega - r2.omega
    if delta_sb == 0.0:
        raise ResonanceError("storage-bus detuning is zero")

    h = _bare_resonators(layout, resonators)
    ns = [number(layout, r.label) for r in resonators]
    j1z = collective_operator(layout, switches[0].collection, "z", include_odd=include_odd_in_jz)
    j2z = collective_operator(layout, switches[1].collection, "z", include_odd=include_odd_in_jz)
    g12 = coeffs[0].g_ab
    g23 = coeffs[1].g_ab
    corr_1 = g12**2 / delta_sb
    corr_2 = g23**2 / delta_sb

    h = h + TWO_PI * (
        (0.5 * switches[0].omega_q) * j1z
        + coeffs[0].chi_a * (ns[0] @ j1z)
        + corr_1 * (ns[0] @ j1z @ j1z)
        + coeffs[0].chi_b * (ns[1] @ j1z)
        - corr_1 * (ns[1] @ j1z @ j1z)
    )
    h = h + TWO_PI * (
        (0.5 * switches[1].omega_q) * j2z
        + coeffs[1].chi_a * (ns[1] @ j2z)
        - corr_2 * (ns[1] @ j2z @ j2z)
        + coeffs[1].chi_b * (ns[2] @ j2z)
        + corr_2 * (ns[2] @ j2z @ j2z)
    )
    a1 = annihilation(layout, r1.label)
    a3 = annihilation(layout, r3.label)
    h = h + (TWO_PI * g12 * g23 / delta_sb) * (
        (a1.dag() @ a3 + a1 @ a3.dag()) @ j1z @ j2z
    )
    return h


def distant_coupling(g_chain, delta_sb, m):
    """End-to-end coupling of an m-resonator chain: prod(g) / delta_sb^(m-2).

    g_chain lists the m-1 adjacent couplings in GHz; the result is the bare
    coefficient, before any J^z eigenvalue factors.
    """
    g_chain = list(g_chain)
    if m < 3:
        raise ValueError(f"distant coupling needs m >= 3, got m={m}")
    if len(g_chain) != m - 1:
        raise ValueError(f"need {m - 1} adjacent couplings for m={m}, got {len(g_chain)}")
    if delta_sb == 0.0:
        raise ResonanceError("storage-bus detuning is zero")
    return math.prod(g_chain) / delta_sb ** (m - 2)
