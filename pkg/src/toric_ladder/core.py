"""Dense statevector / density-matrix engine.

States are plain numpy arrays: a statevector is a complex vector of length
``2**N`` and a density matrix is a ``2**N x 2**N`` complex array. Rotation
gates follow ``Rz(theta) = exp(-i theta Z / 2)`` and ``Rx(theta) = exp(-i theta X / 2)``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .lattice import LadderModel, PauliString, pauli_action

#: Sampler used by :func:`sample_z_basis`; recorded in run metadata.
PRNG_NAME = "numpy.PCG64"

GATE_KINDS = ("H", "X", "Z", "CNOT", "RZ", "RX")

_SQ2 = 1 / np.sqrt(2)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", targets)
        if kind not in GATE_KINDS:
            raise ValueError(f"unknown gate {self.kind!r}")
        arity = 2 if kind == "CNOT" else 1
        if len(targets) != arity:
            raise ValueError(f"{kind} takes {arity} target(s), got {targets}")
        if kind == "CNOT" and targets[0] == targets[1]:
            raise ValueError(f"CNOT control and target coincide: {targets}")
        if (kind in ("RZ", "RX")) != (self.theta is not None):
            raise ValueError(f"{kind} angle mismatch: theta={self.theta}")
        if self.theta is not None:
            object.__setattr__(self, "theta", float(self.theta))

    def matrix(self) -> np.ndarray:
        """Unitary on the target subspace (control first for CNOT)."""
        if self.kind in _FIXED:
            return _FIXED[self.kind]
        if self.kind == "CNOT":
            return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        c, s = np.cos(self.theta / 2), np.sin(self.theta / 2)
        if self.kind == "RZ":
            return np.diag([c - 1j * s, c + 1j * s])
        return np.array([[c, -1j * s], [-1j * s, c]])


Circuit = tuple[Gate, ...]


def n_qubits_of(state: np.ndarray) -> int:
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise ValueError(f"state dimension {dim} is not a power of two")
    return n


def basis_state(bits: str | Sequence[int]) -> np.ndarray:
    """Computational basis state; ``bits[0]`` is qubit label 1."""
    bits = [int(b) for b in bits]
    psi = np.zeros(1 << len(bits), dtype=complex)
    psi[int("".join(map(str, bits)), 2) if bits else 0] = 1.0
    return psi


def zero_state(n_qubits: int) -> np.ndarray:
    return basis_state([0] * n_qubits)


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    """Return a new statevector with ``gate`` applied."""
    n = n_qubits_of(state)
    for t in gate.targets:
        if not 0 <= t < n:
            raise ValueError(f"gate target {t} out of range for {n} qubits")
    psi = np.asarray(state, dtype=complex)
    if gate.kind == "CNOT":
        c, t = gate.targets
        out = psi.reshape((2,) * n).copy()
        sel = [slice(None)] * n
        sel[c] = 1
        sub = out[tuple(sel)]
        axis = t - (1 if t > c else 0)
        out[tuple(sel)] = np.flip(sub, axis=axis).copy()
        return out.reshape(-1)
    (q,) = gate.targets
    view = psi.reshape(1 << q, 2, -1)
    out = np.einsum("ij,ajb->aib", gate.matrix(), view)
    return out.reshape(-1)


def apply_circuit(state: np.ndarray, circuit: Iterable[Gate]) -> np.ndarray:
    for gate in circuit:
        state = apply_gate(state, gate)
    return state


def circuit_unitary(circuit: Iterable[Gate], n_qubits: int) -> np.ndarray:
    """Dense unitary of a circuit, built column by column."""
    circuit = tuple(circuit)
    dim = 1 << n_qubits
    cols = [apply_circuit(np.eye(dim, dtype=complex)[:, k], circuit) for k in range(dim)]
    return np.stack(cols, axis=1)


def apply_pauli(state: np.ndarray, op: PauliString) -> np.ndarray:
    perm, phases = pauli_action(op, n_qubits_of(state))
    out = np.empty_like(state, dtype=complex)
    out[perm] = phases * state
    return out


def expectation(state: np.ndarray, op: PauliString) -> float:
    """``<psi|op|psi>`` for a vector or ``Tr(rho op)`` for a matrix.

    The real part is returned; for Hermitian ``op`` the imaginary part
    vanishes up to rounding.
    """
    n = n_qubits_of(state)
    perm, phases = pauli_action(op, n)
    if state.ndim == 1:
        return float(np.real(np.vdot(state[perm], phases * state)))
    if state.ndim == 2:
        idx = np.arange(state.shape[0])
        return float(np.real(np.sum(phases * state[idx, perm])))
    raise ValueError(f"state must be 1-D or 2-D, got shape {state.shape}")


def _rng(seed: int | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def sample_z_basis(state: np.ndarray, shots: int, seed: int | np.random.Generator) -> dict[str, int]:
    """Draw ``shots`` Z-basis outcomes by inverse CDF.

    Bitstrings list qubit label 1 first. Passing a Generator continues its
    stream, which is how multi-time-step runs stay reproducible.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    n = n_qubits_of(state)
    cdf = np.cumsum(np.abs(state) ** 2)
    cdf /= cdf[-1]
    draws = np.searchsorted(cdf, _rng(seed).random(shots), side="right")
    draws = np.minimum(draws, cdf.size - 1)
    counts = np.bincount(draws, minlength=cdf.size)
    return {format(k, f"0{n}b"): int(c) for k, c in enumerate(counts) if c}


def merge_histograms(histograms: Iterable[Mapping[str, int]]) -> dict[str, int]:
    total: Counter[str] = Counter()
    for h in histograms:
        total.update(h)
    return dict(sorted(total.items()))


def estimate_star_expectations(histogram: Mapping[str, int], model: LadderModel) -> np.ndarray:
    """Shot-average of each star's Z-parity (+1 for even, -1 for odd)."""
    n = model.n_qubits
    total = 0
    sums = np.zeros(model.stars)
    for bits, count in histogram.items():
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise ValueError(f"malformed bitstring {bits!r} for {n} qubits")
        for s, star in enumerate(model.star_ops):
            ones = sum(bits[q] == "1" for q in star.qubits)
            sums[s] += count * (-1 if ones % 2 else 1)
        total += count
    if total == 0:
        raise ValueError("empty histogram")
    return sums / total
