"""Collective operators and states for pairwise-grouped qubit registers.

A switch groups its qubits into pairs; collective operators sum single-qubit
Paulis over the paired qubits, and J^{+-} sums the per-pair product
(s1+ + s2+)(s1- + s2-). With this normalization [J^i, J^j] = 2i e_ijk J^k,
J^z |j,m> = 2m |j,m>, and the ladder obeys
J^{+/-} |j,m> = sqrt((j -/+ m)(j +/- m + 1)) |j, m +/- 1>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LayoutError
from .operators import Operator, StateVector, local_operator, pauli

_SQ2 = np.sqrt(2.0)

PAIR_VECTORS = {
    "gg": np.array([1, 0, 0, 0], dtype=complex),
    "ge": np.array([0, 1, 0, 0], dtype=complex),
    "eg": np.array([0, 0, 1, 0], dtype=complex),
    "ee": np.array([0, 0, 0, 1], dtype=complex),
    # basis order within a pair: |gg>, |ge>, |eg>, |ee>
    "singlet": np.array([0, -1 / _SQ2, 1 / _SQ2, 0], dtype=complex),
    "triplet0": np.array([0, 1 / _SQ2, 1 / _SQ2, 0], dtype=complex),
}


@dataclass(frozen=True)
class QubitCollection:
    """Qubit labels of one switch, grouped into pairs plus an optional odd tail."""

    labels: tuple
    pairs: tuple
    odd_tail: str | None = None

    def __post_init__(self):
        paired = [q for p in self.pairs for q in p]
        expected = paired + ([self.odd_tail] if self.odd_tail else [])
        if list(self.labels) != expected:
            raise LayoutError("pair grouping does not cover the labels in order")
        if len(set(self.labels)) != len(self.labels):
            raise LayoutError("duplicate qubit labels in collection")

    @classmethod
    def from_labels(cls, labels):
        """Group consecutive labels into pairs; a leftover label becomes the odd tail."""
        labels = tuple(labels)
        n_pairs = len(labels) // 2
        pairs = tuple((labels[2 * k], labels[2 * k + 1]) for k in range(n_pairs))
        tail = labels[-1] if len(labels) % 2 else None
        return cls(labels, pairs, tail)

    @property
    def n_qubits(self):
        return len(self.labels)

    @property
    def n_pairs(self):
        return len(self.pairs)

    @property
    def paired_labels(self):
        return tuple(q for p in self.pairs for q in p)


@dataclass(frozen=True)
class CollectiveQuantumNumbers:
    """Integer (j, m) labels of a collective state, J^z eigenvalue 2m."""

    j: int
    m: int

    def __post_init__(self):
        if self.j < 0 or self.j != int(self.j):
            raise ValueError(f"j must be a non-negative integer, got {self.j}")
        if abs(self.m) > self.j:
            raise ValueError(f"|m| <= j required, got j={self.j}, m={self.m}")


def collective_operator(layout, collection, kind, include_odd=False):
    """Sum of single-qubit operators over the collection.

    kind is one of "x", "y", "z", "plus", "minus", "pm". The odd tail qubit
    is excluded by the pairing convention; include_odd=True adds its sigma_z
    to the "z" operator (the inclusive convention for odd qubit counts).
    """
    if include_odd and kind != "z":
        raise ValueError("include_odd applies only to the z operator")
    if kind == "pm":
        total = None
        for q1, q2 in collection.pairs:
            up = pauli(layout, q1, "plus") + pauli(layout, q2, "plus")
            dn = pauli(layout, q1, "minus") + pauli(layout, q2, "minus")
            term = up @ dn
            total = term if total is None else total + term
        if total is None:
            raise LayoutError("collection has no pairs")
        return total
    if kind not in ("x", "y", "z", "plus", "minus"):
        raise ValueError(f"unknown collective operator kind {kind!r}")
    qubits = list(collection.paired_labels)
    if include_odd and collection.odd_tail:
        qubits.append(collection.odd_tail)
    if not qubits:
        raise LayoutError("collection has no qubits to sum over")
    total = pauli(layout, qubits[0], kind)
    for q in qubits[1:]:
        total = total + pauli(layout, q, kind)
    return total


def _normalize_pattern(collection, pattern, pair_dim=2):
    pattern = [
        tok if isinstance(tok, str) else np.asarray(tok, dtype=complex).ravel()
        for tok in pattern
    ]
    if len(pattern) != collection.n_pairs:
        raise LayoutError(
            f"pattern length {len(pattern)} does not match {collection.n_pairs} pairs"
        )
    blocks = []
    for tok in pattern:
        if isinstance(tok, str):
            if tok not in PAIR_VECTORS:
                raise LayoutError(f"unknown pair state token {tok!r}")
            vec = PAIR_VECTORS[tok]
        else:
            if tok.shape != (4,):
                raise LayoutError("a pair amplitude vector must have length 4")
            vec = tok
        block = np.zeros((pair_dim, pair_dim), dtype=complex)
        block[:2, :2] = vec.reshape(2, 2)
        blocks.append(block)
    return blocks


def multi_pair_product_state(layout, assignments, occupations=None):
    """Product state over several pair collections at once.

    assignments lists (collection, pattern) entries; pattern follows
    pair_product_state. Pairs of qubits with layout dimension above 2 embed
    the two-qubit state in the lowest two levels. Every other subsystem,
    including odd tail qubits, sits at its occupation-given level
    (default 0).
    """
    occupations = dict(occupations or {})
    pos_of = {lab: k for k, lab in enumerate(layout.labels)}
    pair_at = {}
    assigned = set()
    for collection, pattern in assignments:
        dims = {layout.subsystem(q).dim for p in collection.pairs for q in p}
        if len(dims) > 1:
            raise LayoutError("paired subsystems must share one dimension")
        pair_dim = dims.pop() if dims else 2
        blocks = _normalize_pattern(collection, pattern, pair_dim)
        for block, (q1, q2) in zip(blocks, collection.pairs):
            p1, p2 = pos_of[q1], pos_of[q2]
            if p1 in assigned or p2 in assigned:
                raise LayoutError(f"pair ({q1!r}, {q2!r}) overlaps another assignment")
            assigned.update((p1, p2))
            pair_at[min(p1, p2)] = (block, p1, p2)

    consumed = set()
    groups = []  # (positions tuple, amplitude tensor)
    for k, sub in enumerate(layout.subsystems):
        if k in consumed:
            continue
        if k in pair_at:
            block, p1, p2 = pair_at[k]
            groups.append(((p1, p2), block))
            consumed.update((p1, p2))
        else:
            n = int(occupations.pop(sub.label, 0))
            if not 0 <= n < sub.dim:
                raise LayoutError(f"occupation {n} out of range for {sub.label!r}")
            v = np.zeros(sub.dim, dtype=complex)
            v[n] = 1.0
            groups.append(((k,), v))
            consumed.add(k)
    if occupations:
        raise LayoutError(f"labels not in layout: {sorted(occupations)}")

    tensor = groups[0][1]
    axes = list(groups[0][0])
    for positions, block in groups[1:]:
        tensor = np.tensordot(tensor, block, axes=0)
        axes.extend(positions)
    order = np.argsort(axes)
    tensor = np.transpose(tensor, order)
    return StateVector(layout, tensor.ravel())


def pair_product_state(layout, collection, pattern, occupations=None):
    """Product state with each pair set to a named or explicit two-qubit state.

    pattern lists one entry per pair: a PAIR_VECTORS token ("gg", "ge", "eg",
    "ee", "singlet", "triplet0") or a raw length-4 amplitude vector. The odd
    tail qubit and every subsystem outside the collection sit in their
    ground/occupation-given levels.
    """
    return multi_pair_product_state(layout, [(collection, pattern)], occupations)


def subradiant_state(layout, collection, j):
    """Canonical |->_j: the first j pairs in |gg>, the rest in singlets.

    J^z eigenvalue is -2j and J^- annihilates the state for every
    0 <= j <= n_pairs.
    """
    n = collection.n_pairs
    if not 0 <= j <= n:
        raise ValueError(f"j must lie in [0, {n}], got {j}")
    pattern = ["gg"] * j + ["singlet"] * (n - j)
    return pair_product_state(layout, collection, pattern)


def dicke_state(layout, collection, j, m):
    """Collective |j, m>, built by laddering up from the pair-product |j, -j>.

    Each raising step divides by sqrt((j - m)(j + m + 1)) so the chain of
    states carries the standard su(2) matrix elements.
    """
    qn = CollectiveQuantumNumbers(j, m)
    if qn.j > collection.n_pairs:
        raise ValueError(f"j={qn.j} exceeds the {collection.n_pairs}-pair maximum")
    state = subradiant_state(layout, collection, qn.j)
    if qn.j == 0:
        return state
    jplus = collective_operator(layout, collection, "plus")
    amps = state.amplitudes
    mm = -qn.j
    while mm < qn.m:
        coeff = np.sqrt((qn.j - mm) * (qn.j + mm + 1))
        amps = (jplus.matrix @ amps) / coeff
        mm += 1
    return StateVector(layout, amps)
