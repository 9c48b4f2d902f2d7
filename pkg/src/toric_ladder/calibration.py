"""Trotter-depth selection and bath-strength fitting."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .circuits import QuenchSpec, quench
from .dynamics import evolve_quench_exact, evolve_trotter
from .lattice import LadderModel
from .lindblad import DEFAULT_STEP, BathSpec, evolve_quench_lindblad
from .series import ObservableSeries

T = TypeVar("T")
R = TypeVar("R")


class ThresholdUnreachable(RuntimeError):
    pass


def parallel_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """Map preserving input order; ``jobs > 1`` uses worker processes."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def reference_configs(model: LadderModel) -> list[tuple[int, ...]]:
    """Spinon-on-star-1 vison layouts: none, then one vison per interior plaquette."""
    return [()] + [(p,) for p in range(2, model.stars + 1)]


@dataclass
class TrotterErrorReport:
    n: int
    error: float
    breakdown: dict[tuple[tuple[int, ...], int], float] = field(default_factory=dict)


def trotter_error(model: LadderModel, n: int, total_time: float = 10.0) -> TrotterErrorReport:
    """Mean ``|A_s(exact) - A_s(Trotter)|`` over stars, vison layouts and ``t_k = kT/n, k >= 1``.

    ``breakdown`` maps ``(visons, star)`` to that pair's mean over times.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    breakdown = {}
    for visons in reference_configs(model):
        spec = quench(model, 1, visons, total_time, n)
        diff = np.abs(evolve_quench_exact(model, spec).stars - evolve_trotter(model, spec).stars)[1:]
        for s in range(model.stars):
            breakdown[(visons, s + 1)] = float(diff[:, s].mean())
    return TrotterErrorReport(n, float(np.mean(list(breakdown.values()))), breakdown)


@dataclass
class TrotterSearch:
    n_opt: int
    threshold: float
    table: list[TrotterErrorReport]

    def to_csv(self) -> str:
        return "n,error\n" + "".join(f"{r.n},{r.error!r}\n" for r in self.table)

    def summary(self) -> str:
        lines = [f"n_opt = {self.n_opt}", f"threshold = {self.threshold}"]
        lines += [f"  n={r.n:<4d} error={r.error:.4f}" for r in self.table]
        return "\n".join(lines)


def _error_task(args):
    model, n, total_time = args
    return trotter_error(model, n, total_time)


def trotter_error_table(model: LadderModel, ns: Sequence[int], total_time: float = 10.0, jobs: int = 1):
    return parallel_map(_error_task, [(model, n, total_time) for n in ns], jobs)


def find_optimal_trotter_steps(
    model: LadderModel,
    total_time: float = 10.0,
    threshold: float = 0.15,
    n_max: int = 16,
    jobs: int = 1,
) -> TrotterSearch:
    """Smallest ``n <= n_max`` whose Trotter error is below ``threshold``.

    The full ``1..n_max`` table is computed and returned either way; failure
    raises :class:`ThresholdUnreachable` with the table attached as ``.table``.
    """
    if not 0 < threshold <= 2:
        raise ValueError(f"threshold must lie in (0, 2], got {threshold}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    table = trotter_error_table(model, range(1, n_max + 1), total_time, jobs)
    for report in table:
        if report.error < threshold:
            return TrotterSearch(report.n, threshold, table)
    exc = ThresholdUnreachable(f"threshold unreachable: no n <= {n_max} has error < {threshold}")
    exc.table = table
    raise exc


@dataclass
class GammaFitReport:
    grid: list[float]
    errors: list[float]
    best_gamma: float
    bath_kind: str = "isotropic"

    def to_csv(self) -> str:
        return "gamma,error\n" + "".join(f"{g!r},{e!r}\n" for g, e in zip(self.grid, self.errors))

    def summary(self) -> str:
        lines = [f"best_gamma = {self.best_gamma!r}", f"bath = {self.bath_kind}"]
        lines += [f"  gamma={g:<10.6g} error={e:.6f}" for g, e in zip(self.grid, self.errors)]
        return "\n".join(lines)


def _reference_spec(model: LadderModel, ref: ObservableSeries) -> tuple[QuenchSpec, np.ndarray]:
    meta = ref.metadata
    if meta.get("stars", model.stars) != model.stars or ref.n_stars != model.stars:
        raise ValueError(f"reference has {ref.n_stars} stars, model has {model.stars}")
    times = np.asarray(ref.times)
    if times[0] != 0 or np.any(np.diff(times) <= 0):
        raise ValueError("time-grid mismatch: reference times must start at 0 and increase")
    spinon = meta.get("spinon", 1)
    visons = meta.get("visons") or []
    if isinstance(visons, int):
        visons = [visons]
    total_time = float(times[-1]) if len(times) > 1 else 0.0
    steps = max(1, len(times) - 1)
    return quench(model, spinon, visons, total_time, steps), times


def _fit_task(args):
    model, spec, times, gamma, kind, fidelity, h = args
    return evolve_quench_lindblad(model, spec, BathSpec(gamma, kind), fidelity, times=times, h=h).stars


def fit_gamma(
    references: ObservableSeries | Sequence[ObservableSeries],
    model: LadderModel,
    fidelity: float = 0.85,
    bath_kind: str = "isotropic",
    grid: Sequence[float] = (0.006, 0.008, 0.010),
    h: float = DEFAULT_STEP,
    jobs: int = 1,
) -> GammaFitReport:
    """Grid search of the bath coupling by mean absolute star deviation.

    Each reference carries its quench layout (``spinon``, ``visons``) in its
    metadata; simulations run on the reference's own time grid. Ties go to the
    smaller coupling.
    """
    if isinstance(references, ObservableSeries):
        references = [references]
    grid = sorted(float(g) for g in grid)
    if not grid:
        raise ValueError("gamma grid is empty")
    if not references:
        raise ValueError("no reference series")
    setups = [_reference_spec(model, ref) for ref in references]
    tasks = [(model, spec, times, g, bath_kind, fidelity, h) for g in grid for spec, times in setups]
    sims = parallel_map(_fit_task, tasks, jobs)
    errors = []
    for gi in range(len(grid)):
        chunk = sims[gi * len(setups):(gi + 1) * len(setups)]
        devs = np.concatenate([np.abs(sim - ref.stars).ravel() for sim, ref in zip(chunk, references)])
        errors.append(float(devs.mean()))
    best = grid[int(np.argmin(errors))]
    return GammaFitReport(grid, errors, best, bath_kind)
