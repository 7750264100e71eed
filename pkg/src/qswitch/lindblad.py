"""Master-equation integration with factor-2 Lindblad dissipators.

The generator is dрho/dt = -i[H, rho] + sum_c rate_c * D[X_c] rho with
D[X] rho = 2 X rho X^+ - X^+ X rho - rho X^+ X. Rates are plain GHz and are
scaled by 2*pi internally, matching the Hamiltonian convention; the Eq.-(20)
style one-half prefactors on qubit dissipators are folded into the stored
rate by the constructors below. A single decaying mode therefore loses
population as exp(-2 * 2*pi*kappa * t).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .collective import QubitCollection, collective_operator
from .errors import ConfigError, ConvergenceError, LayoutError, TruncationWarning
from .operators import TWO_PI, DensityMatrix, Operator, annihilation

DEFAULT_DT = 0.01
TRACE_TOL = 1e-6
CONVERGENCE_RTOL = 1e-4
TOP_LEVEL_WARN = 1e-4


@dataclass(frozen=True)
class CollapseTerm:
    """One dissipation channel: rate * D[operator].

    rate is the full prefactor in GHz; for pairwise qubit channels the
    one-half convention factor is already included by the helpers below.
    """

    operator: Operator
    rate: float
    label: str = ""

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"collapse rate must be >= 0, got {self.rate}")


@dataclass
class Trajectory:
    """Sampled observable time series plus integrator bookkeeping."""

    times: np.ndarray
    series: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        for label, values in self.series.items():
            values = np.asarray(values, dtype=float)
            if values.shape != self.times.shape:
                raise ValueError(f"series {label!r} length does not match times")
            self.series[label] = values


def resonator_collapse_terms(layout, resonators):
    """kappa * D[a_r] for every resonator with a nonzero decay rate."""
    terms = []
    for res in resonators:
        if res.kappa > 0:
            terms.append(
                CollapseTerm(annihilation(layout, res.label), res.kappa, f"decay_{res.label}")
            )
    return terms


def switch_collapse_terms(layout, switch):
    """Pairwise (gamma/2) D[J_pair^-] and (gamma_phi/2) D[J_pair^z] channels.

    The channels act per qubit pair, not per switch, which is what makes
    every product of |gg> and singlet pairs exactly dark. An odd trailing
    qubit carries no channel of its own.
    """
    terms = []
    col = switch.collection
    for idx, pair in enumerate(col.pairs):
        single = QubitCollection.from_labels(pair)
        if switch.gamma > 0:
            terms.append(
                CollapseTerm(
                    collective_operator(layout, single, "minus"),
                    switch.gamma / 2.0,
                    f"relax_{pair[0]}_{pair[1]}",
                )
            )
        if switch.gamma_phi > 0:
            terms.append(
                CollapseTerm(
                    collective_operator(layout, single, "z"),
                    switch.gamma_phi / 2.0,
                    f"dephase_{pair[0]}_{pair[1]}",
                )
            )
    return terms


def dissipator(x, rho):
    """D[X] rho = 2 X rho X^+ - X^+ X rho - rho X^+ X (unscaled by any rate)."""
    if x.layout != rho.layout:
        raise LayoutError("operator and state live on different layouts")
    xm = x.matrix
    xd = x.dag().matrix
    m = rho.matrix
    sandwich = _lmul(xm, _rmul(m, xd))
    xdx = xd @ xm
    out = 2.0 * sandwich - _lmul(xdx, m) - _rmul(m, xdx)
    return DensityMatrix(rho.layout, np.asarray(out))


def _lmul(op, dense):
    return op @ dense


def _rmul(dense, op):
    # dense @ sparse via two transposes keeps the result a plain ndarray
    if sparse.issparse(op):
        return (op.T @ dense.T).T
    return dense @ op


def _expect(op_matrix, rho):
    if sparse.issparse(op_matrix):
        return complex(op_matrix.multiply(rho.T).sum())
    return complex(np.einsum("ij,ji->", op_matrix, rho))


_SUPEROP_LIMIT = 256


class _Generator:
    """Precomputed right-hand side of the master equation.

    Small systems flatten the whole generator into one sparse matrix acting
    on vec(rho), which replaces dozens of tiny matrix products per step with
    a single matrix-vector product. Large systems stay in matrix form.
    """

    def __init__(self, hamiltonian, collapses):
        def as_sparse(mat):
            return mat.tocsr() if sparse.issparse(mat) else sparse.csr_matrix(mat)

        drift = -1j * as_sparse(hamiltonian.matrix)
        jumps = []
        for term in collapses:
            if term.rate == 0.0:
                continue
            rate = TWO_PI * term.rate
            x = as_sparse(term.operator.matrix)
            xd = x.conj().T.tocsr()
            drift = drift - rate * (xd @ x)
            jumps.append((2.0 * rate, x, xd))
        dim = hamiltonian.layout.total_dim
        if dim <= _SUPEROP_LIMIT:
            eye = sparse.identity(dim, dtype=complex, format="csr")
            # vec(A rho B) = (A kron B^T) vec(rho), row-major flattening
            lio = sparse.kron(drift, eye) + sparse.kron(eye, drift.conj())
            for rate2, x, xd in jumps:
                lio = lio + rate2 * sparse.kron(x, x.conj())
            self.superop = lio.tocsr()
            self.drift = self.drift_dag = None
            self.jumps = []
        else:
            self.superop = None
            self.drift = drift
            self.drift_dag = drift.conj().T.tocsr()
            self.jumps = jumps

    def __call__(self, rho):
        if self.superop is not None:
            return (self.superop @ rho.ravel()).reshape(rho.shape)
        out = _lmul(self.drift, rho) + _rmul(rho, self.drift_dag)
        for rate2, x, xd in self.jumps:
            out = out + rate2 * _lmul(x, _rmul(rho, xd))
        return out


def _rk4_step(gen, rho, h):
    k1 = gen(rho)
    k2 = gen(rho + (0.5 * h) * k1)
    k3 = gen(rho + (0.5 * h) * k2)
    k4 = gen(rho + h * k3)
    rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return 0.5 * (rho + rho.conj().T)


def _boson_top_levels(layout, rho):
    probs = np.clip(np.real(np.diag(rho)), 0.0, None).reshape(layout.dims)
    out = {}
    for k, sub in enumerate(layout.subsystems):
        if sub.kind != "boson":
            continue
        sl = [slice(None)] * len(layout.dims)
        sl[k] = sub.dim - 1
        out[sub.label] = float(probs[tuple(sl)].sum())
    return out


def _run_fixed_step(gen, layout, rho0_matrix, t_grid, ops, dt):
    rho = rho0_matrix.copy()
    samples = {label: [] for label in ops}
    samples["trace"] = []
    samples["min_eig"] = []
    top_levels = {}

    def record(current):
        for label, mat in ops.items():
            samples[label].append(float(np.real(_expect(mat, current))))
        tr = float(np.real(np.trace(current)))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ConvergenceError(
                f"trace drifted to {tr!r}; decrease the step size"
            )
        samples["trace"].append(tr)
        samples["min_eig"].append(float(np.linalg.eigvalsh(current)[0]))
        for lab, p in _boson_top_levels(layout, current).items():
            top_levels[lab] = max(top_levels.get(lab, 0.0), p)

    record(rho)
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        span = t1 - t0
        n_steps = max(1, math.ceil(span / dt - 1e-12))
        h = span / n_steps
        for _ in range(n_steps):
            rho = _rk4_step(gen, rho, h)
        record(rho)
    return samples, top_levels


def integrate(
    hamiltonian,
    collapses,
    rho0,
    t_grid,
    observables,
    dt=DEFAULT_DT,
    convergence_check=True,
):
    """Integrate the master equation over t_grid and sample observables.

    Parameters
    ----------
    hamiltonian : Operator
        Hermitian, rad/ns.
    collapses : sequence of CollapseTerm
    rho0 : DensityMatrix
        Valid (hermitian, unit trace, positive within 1e-8).
    t_grid : array-like, ns
        Strictly increasing, starting at 0. Observables are sampled at
        every entry.
    observables : dict
        label -> Operator; real parts of expectations are recorded. The
        trace and the smallest eigenvalue of rho are always recorded under
        "trace" and "min_eig".
    dt : float
        Fixed step for the classical 4th-order Runge-Kutta scheme. Grid
        intervals that are not multiples of dt use the nearest smaller
        uniform step.
    convergence_check : bool
        When set, the run is repeated at dt/2 and every observable's final
        value must agree to a relative 1e-4, else ConvergenceError.

    Returns
    -------
    Trajectory
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("t_grid must be a one-dimensional, non-empty array")
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if dt <= 0:
        raise ValueError("dt must be positive")
    layout = hamiltonian.layout
    if rho0.layout != layout:
        raise LayoutError("initial state and hamiltonian live on different layouts")
    for term in collapses:
        if term.operator.layout != layout:
            raise LayoutError(f"collapse term {term.label!r} has a different layout")
    rho0.validate()
    if not hamiltonian.is_hermitian(tol=1e-8):
        raise ValueError("hamiltonian is not hermitian within 1e-8")

    ops = {}
    for label, op in observables.items():
        if op.layout != layout:
            raise LayoutError(f"observable {label!r} has a different layout")
        if label in ("trace", "min_eig"):
            raise ValueError(f"observable label {label!r} is reserved")
        ops[label] = op.matrix

    gen = _Generator(hamiltonian, collapses)
    samples, top_levels = _run_fixed_step(gen, layout, rho0.matrix, t_grid, ops, dt)

    metadata = {
        "dt": dt,
        "method": "rk4-fixed",
        "convergence_check": bool(convergence_check),
        "top_level_occupation": top_levels,
    }
    for lab, p in top_levels.items():
        if p > TOP_LEVEL_WARN:
            warnings.warn(
                f"mode {lab!r} reached {p:.2e} population in its top Fock level",
                TruncationWarning,
                stacklevel=2,
            )
    metadata["truncation_warnings"] = sorted(
        lab for lab, p in top_levels.items() if p > TOP_LEVEL_WARN
    )

    if convergence_check and t_grid.size > 1:
        fine, _ = _run_fixed_step(gen, layout, rho0.matrix, t_grid, ops, dt / 2.0)
        worst = ("", 0.0)
        for label in ops:
            a = samples[label][-1]
            b = fine[label][-1]
            rel = abs(a - b) / max(abs(a), abs(b), 1e-9)
            if rel > worst[1]:
                worst = (label, rel)
        metadata["halved_step_relative_change"] = {"label": worst[0], "value": worst[1]}
        if worst[1] > CONVERGENCE_RTOL:
            raise ConvergenceError(
                f"observable {worst[0]!r} changed by {worst[1]:.2e} when the step "
                f"was halved (limit {CONVERGENCE_RTOL})"
            )

    series = {label: np.asarray(vals) for label, vals in samples.items()}
    return Trajectory(times=t_grid.copy(), series=series, metadata=metadata)


def figure4_experiment(config, switch_alpha_on=True, n_qubits=None):
    """Run the three-resonator photon-exchange experiment from a chain config.

    Parameters
    ----------
    config : NetworkConfig
        Must describe a storage-bus-storage chain with two switches.
    switch_alpha_on : bool
        True leaves both switches in their all-ground (coupling on) state;
        False prepares the first switch in its j=0 singlet product
        (coupling off).
    n_qubits : int or None
        Override the qubit count of both switches, keeping everything else.

    Returns
    -------
    Trajectory with one photon-number series per resonator.
    """
    from . import network

    chain = network.chain_order(config)
    if chain is None or len(chain) != 3:
        raise ConfigError("expected a linear chain of 3 resonators")
    roles = tuple(r.role for r in chain)
    if roles != ("storage", "bus", "storage"):
        raise ConfigError(f"expected roles (storage, bus, storage), got {roles}")

    if n_qubits is not None:
        config = network.with_switch_qubit_count(config, n_qubits)
    for sw in config.switches:
        config = network.with_switch_state(config, sw.label, network.all_ground_state(sw))
    if not switch_alpha_on:
        first = config.switches[0]
        config = network.with_switch_state(config, first.label, network.off_state(first))
    return network.simulate_network(config)
