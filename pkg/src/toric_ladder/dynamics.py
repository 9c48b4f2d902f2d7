"""Closed-system evolution: exact propagation, Trotter circuits, shot emulation."""
from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuits import QuenchSpec, prep_circuit, trotter_step_circuit
from .core import (
    PRNG_NAME,
    apply_circuit,
    estimate_star_expectations,
    expectation,
    sample_z_basis,
    zero_state,
)
from .lattice import LadderModel, check_capacity, z_diagonal
from .series import ObservableSeries


def star_diagonals(model: LadderModel) -> np.ndarray:
    """``(L, 2^N)`` array holding the +-1 diagonal of every star operator."""
    return np.array([z_diagonal(a, model.n_qubits) for a in model.star_ops])


def build_hamiltonian(model: LadderModel) -> np.ndarray:
    """Dense ``H = -lambda sum_s A_s - Gamma sum_j X_j``."""
    n = model.n_qubits
    check_capacity(n)
    dim = 1 << n
    ham = np.diag(-model.lam * star_diagonals(model).sum(axis=0)).astype(complex)
    idx = np.arange(dim)
    for j in range(n):
        ham[idx ^ (1 << (n - 1 - j)), idx] -= model.gamma_field
    return ham


@lru_cache(maxsize=16)
def _hamiltonian(model: LadderModel) -> np.ndarray:
    ham = build_hamiltonian(model)
    ham.setflags(write=False)
    return ham


@lru_cache(maxsize=16)
def _spectrum(model: LadderModel) -> tuple[np.ndarray, np.ndarray]:
    ham = _hamiltonian(model)
    if not np.allclose(ham, ham.conj().T, atol=1e-12):
        raise np.linalg.LinAlgError("Hamiltonian is not Hermitian")
    return np.linalg.eigh(ham)


def default_grid(total_time: float, intervals: int) -> np.ndarray:
    return np.arange(intervals + 1) * (total_time / intervals)


def prepare_state(model: LadderModel, spec: QuenchSpec) -> np.ndarray:
    return apply_circuit(zero_state(model.n_qubits), prep_circuit(model, spec))


def _record(model: LadderModel, psi: np.ndarray) -> tuple[list[float], list[float]]:
    return (
        [expectation(psi, a) for a in model.star_ops],
        [expectation(psi, b) for b in model.plaquette_ops],
    )


def _base_metadata(model: LadderModel, method: str, spec: QuenchSpec | None = None) -> dict:
    meta = {"method": method, "stars": model.stars, "lambda": model.lam, "gamma_field": model.gamma_field}
    if spec is not None:
        meta.update(
            spinon=spec.spinon_star,
            visons=list(spec.visons.plaquettes),
            total_time=spec.total_time,
            trotter_steps=spec.trotter_steps,
        )
    return meta


def propagate_exact(model: LadderModel, initial: np.ndarray, times: Sequence[float]) -> list[np.ndarray]:
    """States ``exp(-iHt)|psi0>`` from one cached eigendecomposition."""
    energies, vecs = _spectrum(model)
    coeffs = vecs.conj().T @ initial
    return [vecs @ (np.exp(-1j * energies * t) * coeffs) for t in times]


def evolve_exact(
    model: LadderModel,
    initial: np.ndarray,
    times: Sequence[float],
    spec: QuenchSpec | None = None,
) -> ObservableSeries:
    initial = np.asarray(initial, dtype=complex)
    if abs(np.linalg.norm(initial) - 1) > 1e-10:
        raise ValueError("initial state is not normalized")
    times = np.asarray(times, dtype=float)
    rows = [_record(model, psi) for psi in propagate_exact(model, initial, times)]
    return ObservableSeries(
        times,
        [r[0] for r in rows],
        [r[1] for r in rows],
        metadata=_base_metadata(model, "exact", spec),
    )


def evolve_quench_exact(model: LadderModel, spec: QuenchSpec, times: Sequence[float] | None = None) -> ObservableSeries:
    """Exact evolution of the prepared quench state (Trotter grid by default)."""
    if times is None:
        times = default_grid(spec.total_time, spec.trotter_steps)
    return evolve_exact(model, prepare_state(model, spec), times, spec)


def trotter_states(model: LadderModel, spec: QuenchSpec) -> list[np.ndarray]:
    """Prepared state followed by the state after each of the ``n`` Trotter steps."""
    step = trotter_step_circuit(model, spec.total_time / spec.trotter_steps)
    psi = prepare_state(model, spec)
    states = [psi]
    for _ in range(spec.trotter_steps):
        psi = apply_circuit(psi, step)
        states.append(psi)
    return states


def evolve_trotter(model: LadderModel, spec: QuenchSpec) -> ObservableSeries:
    rows = [_record(model, psi) for psi in trotter_states(model, spec)]
    return ObservableSeries(
        default_grid(spec.total_time, spec.trotter_steps),
        [r[0] for r in rows],
        [r[1] for r in rows],
        metadata=_base_metadata(model, "trotter", spec),
    )


def evolve_sampled(model: LadderModel, spec: QuenchSpec, shots: int = 1000, seed: int = 0) -> ObservableSeries:
    """Trotter trajectory read out through ``shots`` Z-basis samples per step.

    One PCG64 stream seeded with ``seed`` is consumed in time order.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    stars = [
        estimate_star_expectations(sample_z_basis(psi, shots, rng), model)
        for psi in trotter_states(model, spec)
    ]
    meta = _base_metadata(model, "sampled", spec)
    meta.update(shots=shots, seed=seed, prng=PRNG_NAME)
    return ObservableSeries(default_grid(spec.total_time, spec.trotter_steps), stars, None, metadata=meta)


def energy(model: LadderModel, psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, _hamiltonian(model) @ psi)))
