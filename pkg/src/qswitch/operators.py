"""Tensor-product operators and states for registers of bosonic modes and qubits.

Conventions used throughout the package: the first subsystem in a layout is
the slowest-varying index, qubit basis order is (|g>, |e>) with
sigma_z |e> = +|e>, truncated boson modes keep Fock levels 0..dim-1, and
Hamiltonian matrices hold angular frequencies in rad/ns (plain GHz inputs
are multiplied by 2*pi at build time).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from .errors import LayoutError, TruncationWarning

# Layouts up to this total dimension use dense ndarrays; larger ones use CSR.
DENSE_LIMIT = 256

TWO_PI = 2.0 * np.pi

TOP_LEVEL_WARN = 1e-4

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
    "plus": np.array([[0, 0], [1, 0]], dtype=complex),
    "minus": np.array([[0, 1], [0, 0]], dtype=complex),
}


@dataclass(frozen=True)
class Subsystem:
    """One tensor factor: a truncated boson mode or a qubit."""

    label: str
    dim: int
    kind: str  # "boson", "qubit", or "sector" (flat index of a restricted subspace)

    def __post_init__(self):
        if self.kind not in ("boson", "qubit", "sector"):
            raise LayoutError(f"unknown subsystem kind {self.kind!r}")
        if self.kind == "qubit" and self.dim != 2:
            raise LayoutError(f"qubit {self.label!r} must have dim 2, got {self.dim}")
        if self.dim < 2:
            raise LayoutError(f"subsystem {self.label!r} needs dim >= 2, got {self.dim}")


class SpaceLayout:
    """Ordered register of subsystems defining the tensor-product space."""

    def __init__(self, subsystems):
        subsystems = tuple(subsystems)
        labels = [s.label for s in subsystems]
        if len(set(labels)) != len(labels):
            raise LayoutError("duplicate subsystem labels in layout")
        if not subsystems:
            raise LayoutError("layout needs at least one subsystem")
        self.subsystems = subsystems
        self.dims = tuple(s.dim for s in subsystems)
        self.total_dim = int(np.prod(self.dims))
        self._index = {s.label: i for i, s in enumerate(subsystems)}

    @classmethod
    def build(cls, *specs):
        """Build from (label, dim, kind) triples."""
        return cls(Subsystem(*s) for s in specs)

    def position(self, label):
        try:
            return self._index[label]
        except KeyError:
            raise LayoutError(f"no subsystem labeled {label!r}") from None

    def subsystem(self, label):
        return self.subsystems[self.position(label)]

    @property
    def labels(self):
        return tuple(s.label for s in self.subsystems)

    @property
    def qubit_labels(self):
        return tuple(s.label for s in self.subsystems if s.kind == "qubit")

    @property
    def boson_labels(self):
        return tuple(s.label for s in self.subsystems if s.kind == "boson")

    @property
    def dense(self):
        return self.total_dim <= DENSE_LIMIT

    def __eq__(self, other):
        return isinstance(other, SpaceLayout) and self.subsystems == other.subsystems

    def __hash__(self):
        return hash(self.subsystems)

    def __repr__(self):
        parts = ", ".join(f"{s.label}:{s.dim}{s.kind[0]}" for s in self.subsystems)
        return f"SpaceLayout({parts})"


def _kron_dense(mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _kron_sparse(mats):
    out = sparse.csr_matrix(mats[0])
    for m in mats[1:]:
        out = sparse.kron(out, m, format="csr")
    return out


class Operator:
    """Linear operator on a layout; dense below DENSE_LIMIT, CSR above."""

    def __init__(self, layout, matrix):
        n = layout.total_dim
        if matrix.shape != (n, n):
            raise LayoutError(f"matrix shape {matrix.shape} does not match layout dim {n}")
        if sparse.issparse(matrix):
            matrix = matrix.tocsr().astype(complex)
        else:
            matrix = np.asarray(matrix, dtype=complex)
        self.layout = layout
        self.matrix = matrix

    @property
    def is_sparse(self):
        return sparse.issparse(self.matrix)

    def to_dense(self):
        if self.is_sparse:
            return self.matrix.toarray()
        return self.matrix

    def dag(self):
        return Operator(self.layout, self.matrix.T.conj())

    def is_hermitian(self, tol=1e-10):
        d = self.matrix - self.matrix.T.conj()
        if sparse.issparse(d):
            return abs(d).max() <= tol if d.nnz else True
        return np.abs(d).max() <= tol

    def _check(self, other):
        if self.layout != other.layout:
            raise LayoutError("operators live on different layouts")

    def __add__(self, other):
        self._check(other)
        return Operator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other):
        self._check(other)
        return Operator(self.layout, self.matrix - other.matrix)

    def __neg__(self):
        return Operator(self.layout, -self.matrix)

    def __mul__(self, scalar):
        return Operator(self.layout, self.matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.layout, self.matrix @ other.matrix)
        return NotImplemented

    def __repr__(self):
        tag = "sparse" if self.is_sparse else "dense"
        return f"Operator({self.layout!r}, {tag} {self.matrix.shape})"


def local_operator(layout, parts):
    """Embed local matrices into the full space.

    Parameters
    ----------
    layout : SpaceLayout
    parts : dict
        Maps subsystem label to a (dim, dim) matrix; omitted subsystems
        get identities.

    Returns
    -------
    Operator
    """
    mats = []
    for sub in layout.subsystems:
        if sub.label in parts:
            m = np.asarray(parts[sub.label], dtype=complex)
            if m.shape != (sub.dim, sub.dim):
                raise LayoutError(
                    f"local matrix for {sub.label!r} has shape {m.shape}, expected {(sub.dim, sub.dim)}"
                )
            mats.append(m)
        else:
            mats.append(np.eye(sub.dim, dtype=complex))
    unknown = set(parts) - set(layout.labels)
    if unknown:
        raise LayoutError(f"labels not in layout: {sorted(unknown)}")
    if layout.dense:
        return Operator(layout, _kron_dense(mats))
    return Operator(layout, _kron_sparse(mats))


def identity(layout):
    if layout.dense:
        return Operator(layout, np.eye(layout.total_dim, dtype=complex))
    return Operator(layout, sparse.identity(layout.total_dim, format="csr", dtype=complex))


def destroy_matrix(dim):
    """Truncated annihilation matrix: a|n> = sqrt(n)|n-1>."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def annihilation(layout, label):
    sub = layout.subsystem(label)
    if sub.kind != "boson":
        raise LayoutError(f"annihilation is defined on boson modes, {label!r} is a {sub.kind}")
    return local_operator(layout, {label: destroy_matrix(sub.dim)})


def creation(layout, label):
    return annihilation(layout, label).dag()


def number(layout, label):
    sub = layout.subsystem(label)
    if sub.kind != "boson":
        raise LayoutError(f"number is defined on boson modes, {label!r} is a {sub.kind}")
    n = np.diag(np.arange(sub.dim, dtype=float)).astype(complex)
    return local_operator(layout, {label: n})


def pauli(layout, label, axis):
    sub = layout.subsystem(label)
    if sub.kind != "qubit":
        raise LayoutError(f"pauli is defined on qubits, {label!r} is a {sub.kind}")
    try:
        m = _PAULI[axis]
    except KeyError:
        raise LayoutError(f"unknown pauli axis {axis!r}") from None
    return local_operator(layout, {label: m})


def commutator(a, b):
    return a @ b - b @ a


class StateVector:
    """Pure state; amplitudes follow the layout's index ordering."""

    def __init__(self, layout, amplitudes, normalize=False):
        amplitudes = np.asarray(amplitudes, dtype=complex).ravel()
        if amplitudes.shape != (layout.total_dim,):
            raise LayoutError(
                f"amplitude vector length {amplitudes.size} does not match layout dim {layout.total_dim}"
            )
        nrm = np.linalg.norm(amplitudes)
        if normalize:
            if nrm == 0:
                raise ValueError("cannot normalize the zero vector")
            amplitudes = amplitudes / nrm
        elif abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"state norm {nrm} deviates from 1 beyond 1e-10")
        self.layout = layout
        self.amplitudes = amplitudes

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other):
        """<self|other>."""
        if self.layout != other.layout:
            raise LayoutError("states live on different layouts")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other):
        return abs(self.overlap(other)) ** 2

    def to_density(self):
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        return DensityMatrix(self.layout, rho)


class DensityMatrix:
    """Mixed state; stored dense regardless of layout size."""

    def __init__(self, layout, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        n = layout.total_dim
        if matrix.shape != (n, n):
            raise LayoutError(f"matrix shape {matrix.shape} does not match layout dim {n}")
        self.layout = layout
        self.matrix = matrix

    @classmethod
    def from_state(cls, state):
        return state.to_density()

    def trace(self):
        return complex(np.trace(self.matrix))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def validate(self, herm_tol=1e-10, trace_tol=1e-8, eig_tol=1e-8):
        """Raise if hermiticity, unit trace, or positivity is violated."""
        dev = np.abs(self.matrix - self.matrix.T.conj()).max()
        if dev > herm_tol:
            raise ValueError(f"density matrix hermiticity deviation {dev}")
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"density matrix trace {tr} deviates from 1")
        mn = self.min_eigenvalue()
        if mn < -eig_tol:
            raise ValueError(f"density matrix has negative eigenvalue {mn}")


def basis_state(layout, occupations=None):
    """Computational basis state; omitted labels sit in level 0 (|g> or vacuum)."""
    occupations = dict(occupations or {})
    idx = []
    for sub in layout.subsystems:
        n = int(occupations.pop(sub.label, 0))
        if not 0 <= n < sub.dim:
            raise LayoutError(f"occupation {n} out of range for {sub.label!r} (dim {sub.dim})")
        idx.append(n)
    if occupations:
        raise LayoutError(f"labels not in layout: {sorted(occupations)}")
    amps = np.zeros(layout.total_dim, dtype=complex)
    amps[np.ravel_multi_index(tuple(idx), layout.dims)] = 1.0
    return StateVector(layout, amps)


def product_state(layout, factors):
    """Tensor product of per-subsystem amplitude vectors, one per subsystem in order."""
    factors = [np.asarray(f, dtype=complex).ravel() for f in factors]
    if len(factors) != len(layout.subsystems):
        raise LayoutError("need one factor per subsystem")
    for f, sub in zip(factors, layout.subsystems):
        if f.size != sub.dim:
            raise LayoutError(f"factor for {sub.label!r} has length {f.size}, expected {sub.dim}")
    amps = factors[0]
    for f in factors[1:]:
        amps = np.kron(amps, f)
    return StateVector(layout, amps, normalize=True)


def projector(state):
    """|psi><psi| as an Operator (useful as a fidelity observable)."""
    mat = np.outer(state.amplitudes, state.amplitudes.conj())
    if not state.layout.dense:
        mat = sparse.csr_matrix(mat)
    return Operator(state.layout, mat)


def expectation(op, state):
    """<A> for a StateVector or DensityMatrix; returns complex."""
    if op.layout != state.layout:
        raise LayoutError("operator and state live on different layouts")
    if isinstance(state, StateVector):
        return complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))
    if isinstance(state, DensityMatrix):
        if op.is_sparse:
            return complex(op.matrix.multiply(state.matrix.T).sum())
        return complex(np.einsum("ij,ji->", op.matrix, state.matrix))
    raise TypeError(f"cannot take expectation in {type(state).__name__}")


def partial_trace(state, keep):
    """Reduced density matrix over the subsystems named in keep.

    Accepts a StateVector or DensityMatrix; the result lives on a new layout
    holding the kept subsystems in their original order.
    """
    layout = state.layout
    positions = sorted(layout.position(lab) for lab in keep)
    if len(set(positions)) != len(positions) or not positions:
        raise LayoutError("keep must name a non-empty set of distinct subsystems")
    new_layout = SpaceLayout(tuple(layout.subsystems[p] for p in positions))
    dims = layout.dims
    n = len(dims)
    kept = set(positions)
    if isinstance(state, StateVector):
        psi = state.amplitudes.reshape(dims)
        perm = positions + [p for p in range(n) if p not in kept]
        block = np.transpose(psi, perm).reshape(new_layout.total_dim, -1)
        rho = block @ block.conj().T
    elif isinstance(state, DensityMatrix):
        tensor = state.matrix.reshape(tuple(dims) + tuple(dims))
        row = [0] * n
        col = [0] * n
        out = []
        nxt = 0
        for p in range(n):
            if p in kept:
                row[p] = nxt
                out.append(nxt)
                nxt += 1
            else:
                row[p] = col[p] = nxt
                nxt += 1
        for p in range(n):
            if p in kept:
                col[p] = nxt
                out.append(nxt)
                nxt += 1
        rho = np.einsum(tensor, row + col, out).reshape(
            new_layout.total_dim, new_layout.total_dim
        )
    else:
        raise TypeError(f"cannot reduce a {type(state).__name__}")
    return DensityMatrix(new_layout, rho)


def top_level_occupations(layout, state):
    """Population of the highest Fock level of each boson mode."""
    if isinstance(state, StateVector):
        probs = np.abs(state.amplitudes) ** 2
    else:
        probs = np.real(np.diag(state.matrix))
    probs = probs.reshape(layout.dims)
    out = {}
    for k, sub in enumerate(layout.subsystems):
        if sub.kind != "boson":
            continue
        sl = [slice(None)] * len(layout.dims)
        sl[k] = sub.dim - 1
        out[sub.label] = float(probs[tuple(sl)].sum())
    return out


def warn_if_truncated(layout, state, where=""):
    """Emit TruncationWarning for any boson mode crowding its top level."""
    occ = top_level_occupations(layout, state)
    hits = {lab: p for lab, p in occ.items() if p > TOP_LEVEL_WARN}
    for lab, p in hits.items():
        warnings.warn(
            f"mode {lab!r} holds {p:.2e} population in its top Fock level"
            + (f" during {where}" if where else ""),
            TruncationWarning,
            stacklevel=2,
        )
    return hits


def evolve_unitary(hamiltonian, t, state):
    """Propagate a pure state: psi(t) = exp(-i H t) psi.

    Parameters
    ----------
    hamiltonian : Operator
        Hermitian, in angular units (rad/ns).
    t : float
        Duration in ns, t >= 0.
    state : StateVector

    Returns
    -------
    StateVector

    Notes
    -----
    Uses a dense eigendecomposition, intended for layouts up to a few
    thousand dimensions. Warns when any boson mode ends the evolution
    with more than 1e-4 population in its top Fock level.
    """
    if t < 0:
        raise ValueError(f"evolution time must be non-negative, got {t}")
    if hamiltonian.layout != state.layout:
        raise LayoutError("hamiltonian and state live on different layouts")
    if not hamiltonian.is_hermitian(tol=1e-8):
        raise ValueError("hamiltonian is not hermitian within 1e-8")
    h = hamiltonian.to_dense()
    evals, vecs = np.linalg.eigh(h)
    phases = np.exp(-1j * evals * t)
    amps = vecs @ (phases * (vecs.T.conj() @ state.amplitudes))
    out = StateVector(state.layout, amps)
    warn_if_truncated(state.layout, out, where="unitary evolution")
    return out
