"""Open-system evolution under single-site Pauli baths.

The master equation is

    drho/dt = -i[H, rho] + gamma * sum_i sum_a (s^a_i rho s^a_i - rho)

with ``a`` running over x, y, z (isotropic bath) or z alone (dephasing bath).
Pauli jumps are unitary, so no anticommutator term appears.

Two routes are provided. :func:`evolve_lindblad` integrates the density matrix
directly with fixed-step RK4 and is what the ladder runs use. The vectorized
Liouvillian (:func:`build_superoperator`, :func:`evolve_superoperator`) stacks
rows of ``rho`` and is kept as an independent check on small systems.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .circuits import QuenchSpec
from .core import expectation, n_qubits_of
from .dynamics import prepare_state, star_diagonals
from .lattice import LadderModel, PauliString, check_capacity, to_matrix
from .series import ObservableSeries

BATH_KINDS = ("isotropic", "z_only")
DEFAULT_STEP = 0.02
POSITIVITY_ABORT = -1e-6
HALVING_TOL = 1e-6
DENSE_SUPEROP_QUBITS = 4
SPARSE_SUPEROP_QUBITS = 8


class PositivityError(RuntimeError):
    """Density matrix lost positivity; the step size is too large."""


class ConvergenceError(RuntimeError):
    """Halving the RK4 step moved an expectation by more than the tolerance."""


@dataclass(frozen=True)
class BathSpec:
    gamma: float = 0.008
    kind: str = "isotropic"

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"bath coupling must be >= 0, got {self.gamma}")
        if self.kind not in BATH_KINDS:
            raise ValueError(f"bath kind must be one of {BATH_KINDS}, got {self.kind!r}")

    @property
    def axes(self) -> tuple[str, ...]:
        return ("X", "Y", "Z") if self.kind == "isotropic" else ("Z",)


@dataclass(frozen=True)
class MixedInit:
    """``p |psi><psi| + (1 - p) I / 2^N``."""

    fidelity: float
    pure_state: np.ndarray

    def __post_init__(self):
        if not 0 <= self.fidelity <= 1:
            raise ValueError(f"fidelity must lie in [0, 1], got {self.fidelity}")

    def density_matrix(self) -> np.ndarray:
        return mixed_initial_state(self.pure_state, self.fidelity)


def mixed_initial_state(pure: np.ndarray, p: float) -> np.ndarray:
    if not 0 <= p <= 1:
        raise ValueError(f"fidelity must lie in [0, 1], got {p}")
    pure = np.asarray(pure, dtype=complex)
    dim = pure.shape[0]
    return p * np.outer(pure, pure.conj()) + (1 - p) * np.eye(dim) / dim


def _site_view(rho: np.ndarray, qubit: int, n: int) -> np.ndarray:
    a, b = 1 << qubit, 1 << (n - 1 - qubit)
    return rho.reshape(a, 2, b, a, 2, b)


_PARITY_SIGN = np.array([[1, -1], [-1, 1]]).reshape(1, 2, 1, 1, 2, 1)


def conjugate_pauli(rho: np.ndarray, qubit: int, axis: str) -> np.ndarray:
    """``s^a rho s^a`` on one qubit via index flips and sign changes."""
    n = n_qubits_of(rho)
    view = _site_view(rho, qubit, n)
    if axis == "Z":
        out = view * _PARITY_SIGN
    elif axis == "X":
        out = view[:, ::-1, :, :, ::-1, :]
    elif axis == "Y":
        out = view[:, ::-1, :, :, ::-1, :] * _PARITY_SIGN
    else:
        raise ValueError(f"unknown axis {axis!r}")
    return np.ascontiguousarray(out).reshape(rho.shape)


def lindblad_rhs(ham: np.ndarray, rho: np.ndarray, bath: BathSpec) -> np.ndarray:
    """Master-equation right-hand side for a dense Hamiltonian."""
    if ham.shape != rho.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"dimension mismatch: H {ham.shape}, rho {rho.shape}")
    out = -1j * (ham @ rho - rho @ ham)
    if bath.gamma:
        n = n_qubits_of(rho)
        acc = np.zeros_like(out)
        for q in range(n):
            for axis in bath.axes:
                acc += conjugate_pauli(rho, q, axis)
        acc -= n * len(bath.axes) * rho
        out += bath.gamma * acc
    return out


class LadderGenerator:
    """Fast right-hand side for the ladder Hamiltonian.

    The star part of ``H`` is diagonal, so its commutator is an elementwise
    product. The transverse field and the bath only flip bits or signs.
    """

    def __init__(self, model: LadderModel, bath: BathSpec):
        n = model.n_qubits
        check_capacity(n)
        self.model, self.bath, self.n = model, bath, n
        diag = -model.lam * star_diagonals(model).sum(axis=0)
        self.comm_diag = -1j * (diag[:, None] - diag[None, :])
        idx = np.arange(1 << n)
        zsign = 1 - 2 * ((idx[:, None] >> (n - 1 - np.arange(n))) & 1)
        # sum_i z_i(r) z_i(c): the combined Z-conjugation sign count
        same = zsign @ zsign.T
        diss = np.zeros_like(same, dtype=float)
        if bath.gamma:
            diss = bath.gamma * (same - len(bath.axes) * n)
        self.local = self.comm_diag + diss

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        n, g = self.n, self.model.gamma_field
        dim = rho.shape[0]
        out = self.local * rho
        if g:
            field = np.zeros_like(rho)
            for j in range(n):
                a, b = 1 << j, 1 << (n - 1 - j)
                field.reshape(a, 2, b * dim)[...] += rho.reshape(a, 2, b * dim)[:, ::-1, :]
                field.reshape(dim * a, 2, b)[...] -= rho.reshape(dim * a, 2, b)[:, ::-1, :]
            out += (1j * g) * field
        if self.bath.gamma and self.bath.kind == "isotropic":
            # X and Y conjugations cancel off the qubit-diagonal blocks and add on them
            two_gamma = 2 * self.bath.gamma
            for i in range(n):
                r, o = _site_view(rho, i, n), _site_view(out, i, n)
                o[:, 0, :, :, 0, :] += two_gamma * r[:, 1, :, :, 1, :]
                o[:, 1, :, :, 1, :] += two_gamma * r[:, 0, :, :, 0, :]
        return out


def _rk4_step(rhs: Callable[[np.ndarray], np.ndarray], rho: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(rho)
    k2 = rhs(rho + (h / 2) * k1)
    k3 = rhs(rho + (h / 2) * k2)
    k4 = rhs(rho + h * k3)
    return rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_rk4(
    rhs: Callable[[np.ndarray], np.ndarray],
    rho0: np.ndarray,
    times: Sequence[float],
    h: float = DEFAULT_STEP,
) -> list[np.ndarray]:
    """States at each grid time; each interval uses the fewest equal steps of size <= h."""
    times = np.asarray(times, dtype=float)
    if times[0] != 0:
        raise ValueError(f"time grid must start at 0, got {times[0]}")
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    rho = np.array(rho0, dtype=complex)
    states = [rho.copy()]
    for t0, t1 in zip(times[:-1], times[1:]):
        steps = max(1, math.ceil((t1 - t0) / h - 1e-9))
        dt = (t1 - t0) / steps
        for _ in range(steps):
            rho = _rk4_step(rhs, rho, dt)
        states.append(rho.copy())
    return states


def diagnostics(states: Sequence[np.ndarray]) -> dict[str, np.ndarray]:
    return {
        "trace": np.array([np.trace(r).real for r in states]),
        "min_eig": np.array([np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0] for r in states]),
        "herm_err": np.array([np.abs(r - r.conj().T).max() for r in states]),
    }


def _observe(states, observables: Sequence[PauliString]) -> np.ndarray:
    return np.array([[expectation(r, op) for op in observables] for r in states])


def _initial_matrix(init: MixedInit | np.ndarray) -> tuple[np.ndarray, float | None]:
    if isinstance(init, MixedInit):
        return init.density_matrix(), init.fidelity
    rho = np.asarray(init, dtype=complex)
    if rho.ndim == 1:
        return np.outer(rho, rho.conj()), 1.0
    return rho, None


def evolve_lindblad(
    system: LadderModel | np.ndarray,
    init: MixedInit | np.ndarray,
    bath: BathSpec,
    times: Sequence[float],
    h: float = DEFAULT_STEP,
    observables: Sequence[PauliString] | None = None,
    check_convergence: bool = False,
    spec: QuenchSpec | None = None,
) -> ObservableSeries:
    """Integrate the master equation and record expectations and diagnostics.

    ``system`` is a ladder (structured fast path, records stars and
    plaquettes) or a dense Hamiltonian (generic path, records ``observables``).
    Raises :class:`PositivityError` if the minimum eigenvalue of ``rho`` drops
    below ``-1e-6`` at a grid time.
    """
    rho0, p = _initial_matrix(init)
    times = np.asarray(times, dtype=float)
    if isinstance(system, LadderModel):
        model = system
        rhs = LadderGenerator(model, bath)
        stars_ops, plaq_ops = model.star_ops, model.plaquette_ops
    else:
        ham = np.asarray(system, dtype=complex)
        if observables is None:
            raise ValueError("observables are required with a dense Hamiltonian")
        rhs = lambda rho: lindblad_rhs(ham, rho, bath)  # noqa: E731
        stars_ops, plaq_ops = tuple(observables), None
    states = integrate_rk4(rhs, rho0, times, h)
    diag = diagnostics(states)
    worst = int(np.argmin(diag["min_eig"]))
    if diag["min_eig"][worst] < POSITIVITY_ABORT:
        raise PositivityError(
            f"min eigenvalue {diag['min_eig'][worst]:.3e} at t={times[worst]:g} with h={h:g}; reduce the step"
        )
    stars = _observe(states, stars_ops)
    plaqs = _observe(states, plaq_ops) if plaq_ops is not None else None
    meta: dict = {"method": "lindblad"}
    if isinstance(system, LadderModel):
        meta.update(stars=system.stars, **{"lambda": system.lam}, gamma_field=system.gamma_field)
    if spec is not None:
        meta.update(
            spinon=spec.spinon_star,
            visons=list(spec.visons.plaquettes),
            total_time=spec.total_time,
            trotter_steps=spec.trotter_steps,
        )
    meta.update(gamma=bath.gamma, bath=bath.kind, p=p, rk4_h=h)
    if check_convergence:
        half = integrate_rk4(rhs, rho0, times, h / 2)
        diff = float(np.abs(_observe(half, stars_ops) - stars).max())
        if plaq_ops is not None:
            diff = max(diff, float(np.abs(_observe(half, plaq_ops) - plaqs).max()))
        if diff >= HALVING_TOL:
            raise ConvergenceError(f"halving h={h:g} changed an expectation by {diff:.3e}")
        meta["rk4_halving_diff"] = diff
    return ObservableSeries(times, stars, plaqs, metadata=meta, diagnostics=diag)


def evolve_quench_lindblad(
    model: LadderModel,
    spec: QuenchSpec,
    bath: BathSpec,
    fidelity: float = 0.85,
    times: Sequence[float] | None = None,
    h: float = DEFAULT_STEP,
    check_convergence: bool = False,
) -> ObservableSeries:
    """Open-system run from the prepared quench state mixed with ``I / 2^N``."""
    if times is None:
        times = np.arange(spec.trotter_steps + 1) * (spec.total_time / spec.trotter_steps)
    init = MixedInit(fidelity, prepare_state(model, spec))
    return evolve_lindblad(model, init, bath, times, h=h, check_convergence=check_convergence, spec=spec)


def build_superoperator(ham: np.ndarray, bath: BathSpec, sparse: bool | None = None):
    """Row-stacking Liouvillian: ``vec(rhs(rho)) = L @ rho.reshape(-1)``.

    Dense up to 4 qubits, sparse (CSR) up to 8.
    """
    ham = np.asarray(ham, dtype=complex)
    n = n_qubits_of(ham)
    if sparse is None:
        sparse = n > DENSE_SUPEROP_QUBITS
    cap = SPARSE_SUPEROP_QUBITS if sparse else DENSE_SUPEROP_QUBITS
    if n > cap:
        raise ValueError(f"{n} qubits exceeds the {'sparse' if sparse else 'dense'} superoperator cap of {cap}")
    dim = 1 << n
    if sparse:
        eye = sp.identity(dim, dtype=complex, format="csr")
        hs = sp.csr_matrix(ham)
        out = -1j * (sp.kron(hs, eye) - sp.kron(eye, hs.T))
        for q in range(n):
            for axis in bath.axes:
                s = sp.csr_matrix(to_matrix(PauliString(((q, axis),)), n))
                out = out + bath.gamma * (sp.kron(s, s.T) - sp.identity(dim * dim, format="csr"))
        return sp.csr_matrix(out)
    eye = np.eye(dim)
    out = -1j * (np.kron(ham, eye) - np.kron(eye, ham.T))
    for q in range(n):
        for axis in bath.axes:
            s = to_matrix(PauliString(((q, axis),)), n)
            out += bath.gamma * (np.kron(s, s.T) - np.eye(dim * dim))
    return out


def superoperator_states(
    superop: np.ndarray, rho0: np.ndarray, times: Sequence[float], cond_limit: float = 1e10
) -> tuple[list[np.ndarray], dict]:
    """Evolve ``vec(rho)`` in the eigenbasis of ``superop``.

    Falls back to ``expm`` per time when the eigenvector matrix is
    ill-conditioned. Returns the states and an info dict.
    """
    if sp.issparse(superop):
        raise ValueError("eigen-evolution needs a dense superoperator")
    dim = rho0.shape[0]
    check_capacity(n_qubits_of(rho0), DENSE_SUPEROP_QUBITS)
    vec0 = np.asarray(rho0, dtype=complex).reshape(-1)
    evals, evecs = np.linalg.eig(superop)
    cond = float(np.linalg.cond(evecs))
    info = {"eig_condition": cond, "route": "eigen"}
    if cond < cond_limit:
        coeffs = np.linalg.solve(evecs, vec0)
        states = [(evecs @ (np.exp(evals * t) * coeffs)).reshape(dim, dim) for t in times]
    else:
        info["route"] = "expm"
        states = [(scipy.linalg.expm(superop * t) @ vec0).reshape(dim, dim) for t in times]
    return states, info


def evolve_superoperator(
    superop: np.ndarray,
    rho0: np.ndarray,
    times: Sequence[float],
    observables: LadderModel | Sequence[PauliString],
) -> ObservableSeries:
    """Oracle counterpart of :func:`evolve_lindblad` for small systems."""
    times = np.asarray(times, dtype=float)
    states, info = superoperator_states(superop, np.asarray(rho0, dtype=complex), times)
    if isinstance(observables, LadderModel):
        stars = _observe(states, observables.star_ops)
        plaqs = _observe(states, observables.plaquette_ops)
    else:
        stars, plaqs = _observe(states, observables), None
    meta = {"method": "superoperator", **info}
    return ObservableSeries(times, stars, plaqs, metadata=meta, diagnostics=diagnostics(states))
