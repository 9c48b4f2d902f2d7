"""Toric-ladder geometry and Pauli-string algebra.

Qubits are 0-based internally. User-facing labels (CSV headers, circuit text,
CLI flags) are 1-based, with odd labels on the top leg and even labels on the
bottom leg, so column ``c`` holds labels ``2c-1`` (top) and ``2c`` (bottom).

Basis ordering is fixed for the whole package: qubit 0 (label 1) is the most
significant bit of a computational-basis index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

#: Largest qubit count for which dense 2^N x 2^N matrices are built.
MAX_DENSE_QUBITS = 12

AXES = ("X", "Y", "Z")

# Single-qubit products: (a, b) -> (power of i, resulting axis or None for identity)
_PRODUCT = {
    ("X", "X"): (0, None), ("Y", "Y"): (0, None), ("Z", "Z"): (0, None),
    ("X", "Y"): (1, "Z"), ("Y", "Z"): (1, "X"), ("Z", "X"): (1, "Y"),
    ("Y", "X"): (3, "Z"), ("Z", "Y"): (3, "X"), ("X", "Z"): (3, "Y"),
}

_PHASE_VALUES = (1, 1j, -1, -1j)


class CapacityError(ValueError):
    """Requested dense object exceeds the configured qubit cap."""


def check_capacity(n_qubits: int, cap: int = MAX_DENSE_QUBITS) -> None:
    if n_qubits > cap:
        raise CapacityError(f"{n_qubits} qubits exceeds the dense-matrix cap of {cap}")


@dataclass(frozen=True)
class PauliString:
    """Signed tensor product of single-qubit Pauli operators.

    ``terms`` is a tuple of ``(qubit, axis)`` pairs sorted by qubit, and
    ``phase`` is the exponent ``k`` of the prefactor ``i**k``.
    """

    terms: tuple[tuple[int, str], ...] = ()
    phase: int = 0

    def __post_init__(self):
        terms = tuple(sorted((int(q), str(a).upper()) for q, a in self.terms))
        qubits = [q for q, _ in terms]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate qubit index in Pauli string: {qubits}")
        for q, a in terms:
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if a not in AXES:
                raise ValueError(f"unknown Pauli axis {a!r}")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def from_axes(cls, axis: str, qubits: Iterable[int], phase: int = 0) -> PauliString:
        return cls(tuple((q, axis) for q in qubits), phase)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, str], phase: int = 0) -> PauliString:
        return cls(tuple(mapping.items()), phase)

    @property
    def coefficient(self) -> complex:
        return _PHASE_VALUES[self.phase]

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.terms)

    def as_dict(self) -> dict[int, str]:
        return dict(self.terms)

    def is_identity(self) -> bool:
        return not self.terms

    def masks(self, n_qubits: int) -> tuple[int, int, int]:
        """Return ``(x_mask, z_mask, y_count)`` as basis-index bit masks."""
        x_mask = z_mask = 0
        y_count = 0
        for q, a in self.terms:
            if q >= n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
            bit = 1 << (n_qubits - 1 - q)
            if a in ("X", "Y"):
                x_mask |= bit
            if a in ("Z", "Y"):
                z_mask |= bit
            if a == "Y":
                y_count += 1
        return x_mask, z_mask, y_count

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    def __str__(self) -> str:
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase]
        body = " ".join(f"{a}{q + 1}" for q, a in self.terms) or "I"
        return f"{sign}{body}"


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product ``a @ b`` with the phase tracked exactly in {+-1, +-i}."""
    phase = a.phase + b.phase
    left, right = a.as_dict(), b.as_dict()
    out = {}
    for q in sorted(set(left) | set(right)):
        if q not in right:
            out[q] = left[q]
        elif q not in left:
            out[q] = right[q]
        else:
            k, axis = _PRODUCT[left[q], right[q]]
            phase += k
            if axis is not None:
                out[q] = axis
    return PauliString(tuple(out.items()), phase)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the two strings commute (even number of clashing sites)."""
    right = b.as_dict()
    clashes = sum(1 for q, ax in a.terms if q in right and right[q] != ax)
    return clashes % 2 == 0


def pauli_action(op: PauliString, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """Sparse form of ``op``: ``op |r> = phases[r] |r ^ x_mask>``.

    Returns the permutation ``perm[r] = r ^ x_mask`` and the complex
    ``phases`` array, both of length ``2**n_qubits``.
    """
    x_mask, z_mask, y_count = op.masks(n_qubits)
    idx = np.arange(1 << n_qubits)
    parity = np.zeros(idx.shape, dtype=np.int64)
    m = idx & z_mask
    while np.any(m):
        parity ^= m & 1
        m = m >> 1
    phases = op.coefficient * (1j ** y_count) * (1 - 2 * parity)
    return idx ^ x_mask, phases.astype(complex)


def to_matrix(op: PauliString, n_qubits: int, cap: int = MAX_DENSE_QUBITS) -> np.ndarray:
    """Dense ``2^N x 2^N`` matrix of ``op`` (qubit 0 most significant)."""
    check_capacity(n_qubits, cap)
    perm, phases = pauli_action(op, n_qubits)
    dim = 1 << n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    mat[perm, np.arange(dim)] = phases
    return mat


def z_diagonal(op: PauliString, n_qubits: int) -> np.ndarray:
    """Real diagonal of a +-1-phase, Z-only Pauli string."""
    x_mask, _, _ = op.masks(n_qubits)
    if x_mask or op.phase % 2:
        raise ValueError(f"{op} is not a real Z-string")
    return pauli_action(op, n_qubits)[1].real


@dataclass(frozen=True)
class LadderModel:
    """Toric ladder with ``stars`` four-spin stars on ``2*stars + 2`` qubits."""

    stars: int
    lam: float = 1.0
    gamma_field: float = 0.1
    star_ops: tuple[PauliString, ...] = field(default=(), repr=False)
    plaquette_ops: tuple[PauliString, ...] = field(default=(), repr=False)
    string_op: PauliString = field(default=PauliString(), repr=False)

    @property
    def n_qubits(self) -> int:
        return 2 * self.stars + 2

    @property
    def n_plaquettes(self) -> int:
        return self.stars + 1

    def with_couplings(self, lam: float | None = None, gamma_field: float | None = None) -> LadderModel:
        return build_ladder(
            self.stars,
            self.lam if lam is None else lam,
            self.gamma_field if gamma_field is None else gamma_field,
        )


def build_ladder(stars: int, lam: float = 1.0, gamma_field: float = 0.1) -> LadderModel:
    """Build the ladder geometry.

    Star ``s`` (1-based) is Z on labels ``2s-1 .. 2s+2``; plaquette ``p`` is X
    on the rung ``2p-1, 2p``; the string operator is X on every top-leg qubit.
    """
    if int(stars) != stars or stars < 1:
        raise ValueError(f"a ladder needs at least one star, got {stars!r}")
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if gamma_field < 0:
        raise ValueError(f"transverse field must be non-negative, got {gamma_field}")
    stars = int(stars)
    n = 2 * stars + 2
    star_ops = tuple(PauliString.from_axes("Z", range(2 * s, 2 * s + 4)) for s in range(stars))
    plaquette_ops = tuple(PauliString.from_axes("X", (2 * p, 2 * p + 1)) for p in range(stars + 1))
    string_op = PauliString.from_axes("X", range(0, n, 2))
    return LadderModel(stars, float(lam), float(gamma_field), star_ops, plaquette_ops, string_op)
