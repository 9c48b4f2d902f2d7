"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .calibration import (
    ThresholdUnreachable,
    find_optimal_trotter_steps,
    fit_gamma,
    parallel_map,
    trotter_error_table,
)
from .circuits import quench
from .dynamics import default_grid, evolve_quench_exact, evolve_sampled, evolve_trotter
from .lattice import build_ladder
from .lindblad import BATH_KINDS, DEFAULT_STEP, BathSpec, ConvergenceError, PositivityError, evolve_quench_lindblad
from .series import ObservableSeries, write_atomic

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
METHODS = ("exact", "trotter", "sampled", "lindblad")
FIGURES = ("fig2-upper", "fig2-lower", "supp-trotter", "supp-gamma", "supp-zbath")
CASES = {"i": (), "ii": (2,), "iii": (3,)}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    stars: int = 3
    lam: float = 1.0
    gamma_field: float = 0.1
    method: str = "exact"
    spinon_star: int | None = 1
    visons: list[int] = field(default_factory=list)
    total_time: float = 10.0
    trotter_steps: int = 8
    shots: int = 1000
    seed: int | None = 0
    bath_gamma: float = 0.008
    bath_kind: str = "isotropic"
    fidelity: float = 0.85
    grid: int | None = None
    rk4_h: float = DEFAULT_STEP
    check_convergence: bool = False
    output: str | None = None

    def run(self) -> ObservableSeries:
        if self.method not in METHODS:
            raise UsageError(f"unknown method {self.method!r}")
        model = build_ladder(self.stars, self.lam, self.gamma_field)
        spec = quench(model, self.spinon_star, self.visons, self.total_time, self.trotter_steps)
        times = None if self.grid is None else default_grid(self.total_time, self.grid)
        if self.method == "exact":
            series = evolve_quench_exact(model, spec, times)
        elif self.method == "trotter":
            series = evolve_trotter(model, spec)
        elif self.method == "sampled":
            if self.seed is None:
                raise UsageError("sampled runs need a seed")
            series = evolve_sampled(model, spec, self.shots, self.seed)
        else:
            series = evolve_quench_lindblad(
                model,
                spec,
                BathSpec(self.bath_gamma, self.bath_kind),
                self.fidelity,
                times,
                h=self.rk4_h,
                check_convergence=self.check_convergence,
            )
        if self.method in ("trotter", "sampled") and self.grid is not None:
            series.metadata["grid_note"] = "grid override ignored: circuit runs report at t_k = kT/n"
        return series


def _grid_values(text: str) -> list[float]:
    """``start:step:stop`` (inclusive) or a comma list."""
    text = text.strip()
    if not text:
        raise UsageError("empty gamma grid")
    if ":" in text:
        try:
            start, step, stop = (float(x) for x in text.split(":"))
        except ValueError:
            raise UsageError(f"bad range {text!r}; expected start:step:stop") from None
        if step <= 0 or stop < start:
            raise UsageError(f"bad range {text!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(count)]
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad gamma list {text!r}") from None
    if not values:
        raise UsageError("empty gamma grid")
    return values


def _spinon_arg(text: str) -> int | None:
    if text.lower() == "none":
        return None
    return int(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stars", type=int, default=3, help="number of stars L; N = 2L+2 qubits (default: 3, the 8-qubit device ladder)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="star coupling, the reference energy scale (default: 1)")
    p.add_argument("--gamma-field", type=float, default=0.1, help="transverse field Gamma (default: 0.1, headline run)")
    p.add_argument("--time", dest="total_time", type=float, default=10.0, help="total evolution time T in units of 1/lambda (default: 10, headline run)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="toric-ladder", description="Toric-ladder anyon interferometry simulations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run one quench and write its expectation series as CSV")
    _model_args(sim)
    sim.add_argument("--method", choices=METHODS, default="exact")
    sim.add_argument("--spinon", type=_spinon_arg, default=1, help="star holding the initial spinon, or 'none' (default: 1, leftmost star)")
    sim.add_argument("--vison", type=int, nargs="*", default=[], metavar="P", help="plaquette labels carrying a vison, e.g. --vison 2 (default: none)")
    sim.add_argument("--steps", dest="trotter_steps", type=int, default=8, help="Trotter steps n (default: 8, the calibrated depth for T=10)")
    sim.add_argument("--shots", type=int, default=1000, help="Z-basis samples per time step (default: 1000, as on the device)")
    sim.add_argument("--seed", type=int, default=0, help="PCG64 seed for sampled runs (default: 0)")
    sim.add_argument("--seedless", action="store_true", help="omit the seed; only valid for deterministic methods")
    sim.add_argument("--bath-gamma", type=float, default=0.008, help="bath coupling gamma (default: 0.008, isotropic device fit)")
    sim.add_argument("--bath", dest="bath_kind", choices=BATH_KINDS, default="isotropic", help="jump operators per site (default: isotropic)")
    sim.add_argument("--fidelity", type=float, default=0.85, help="initial-state weight p in p*rho0 + (1-p)*I/2^N (default: 0.85)")
    sim.add_argument("--grid", type=int, default=None, metavar="K", help="report exact/Lindblad runs on K equal intervals (default: the Trotter grid)")
    sim.add_argument("--rk4-h", type=float, default=DEFAULT_STEP, help=f"maximum RK4 step (default: {DEFAULT_STEP})")
    sim.add_argument("--check-convergence", action="store_true", help="rerun Lindblad at h/2 and fail if any expectation moves by >= 1e-6")
    sim.add_argument("-o", "--output", default=None, help="CSV path (default: stdout)")

    cal = sub.add_parser("calibrate-trotter", help="find the smallest Trotter depth under an error threshold")
    _model_args(cal)
    cal.add_argument("--threshold", type=float, default=0.15, help="maximum mean |A_exact - A_trotter| (default: 0.15)")
    cal.add_argument("--n-max", type=int, default=16, help="largest n tried (default: 16)")
    cal.add_argument("--jobs", type=int, default=1)
    cal.add_argument("-o", "--output", default=None, help="write the n,error table here")

    fit = sub.add_parser("fit-gamma", help="grid-search the bath coupling against reference CSVs")
    fit.add_argument("reference", nargs="+", help="reference series CSV(s) with spinon/visons metadata")
    fit.add_argument("--grid", required=True, help="start:step:stop or comma list, e.g. 0.006:0.002:0.010")
    fit.add_argument("--stars", type=int, default=None, help="ladder size (default: from the reference metadata)")
    fit.add_argument("--lambda", dest="lam", type=float, default=None)
    fit.add_argument("--gamma-field", type=float, default=None)
    fit.add_argument("--bath", dest="bath_kind", choices=BATH_KINDS, default="isotropic")
    fit.add_argument("--fidelity", type=float, default=0.85, help="initial-state weight p (default: 0.85)")
    fit.add_argument("--rk4-h", type=float, default=DEFAULT_STEP)
    fit.add_argument("--jobs", type=int, default=1)
    fit.add_argument("-o", "--output", default=None, help="write the gamma,error table here")

    rep = sub.add_parser("reproduce", help="write the CSV bundle behind one figure")
    rep.add_argument("figure", choices=FIGURES)
    rep.add_argument("-o", "--output", default="reproduce", help="output directory (default: ./reproduce/<figure>)")
    rep.add_argument("--shots", type=int, default=1000)
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--grid", type=int, default=100, metavar="K", help="intervals for exact/Lindblad curves (default: 100)")
    rep.add_argument("--rk4-h", type=float, default=DEFAULT_STEP)
    rep.add_argument("--jobs", type=int, default=1)
    return parser


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        write_atomic(output, text)


def cmd_simulate(args) -> int:
    if args.seedless and args.method == "sampled":
        raise UsageError("--seedless cannot be used with --method sampled")
    config = RunConfig(
        stars=args.stars,
        lam=args.lam,
        gamma_field=args.gamma_field,
        method=args.method,
        spinon_star=args.spinon,
        visons=list(args.vison),
        total_time=args.total_time,
        trotter_steps=args.trotter_steps,
        shots=args.shots,
        seed=None if args.seedless else args.seed,
        bath_gamma=args.bath_gamma,
        bath_kind=args.bath_kind,
        fidelity=args.fidelity,
        grid=args.grid,
        rk4_h=args.rk4_h,
        check_convergence=args.check_convergence,
        output=args.output,
    )
    _emit(config.run().to_csv(), args.output)
    return EXIT_OK


def cmd_calibrate_trotter(args) -> int:
    model = build_ladder(args.stars, args.lam, args.gamma_field)
    try:
        search = find_optimal_trotter_steps(model, args.total_time, args.threshold, args.n_max, args.jobs)
    except ThresholdUnreachable as exc:
        if args.output:
            write_atomic(args.output, "n,error\n" + "".join(f"{r.n},{r.error!r}\n" for r in exc.table))
        raise
    if args.output:
        write_atomic(args.output, search.to_csv())
    print(search.summary())
    return EXIT_OK


def cmd_fit_gamma(args) -> int:
    grid = _grid_values(args.grid)
    refs = [ObservableSeries.read(p) for p in args.reference]
    meta = refs[0].metadata
    stars = args.stars if args.stars is not None else int(meta.get("stars", refs[0].n_stars))
    lam = args.lam if args.lam is not None else float(meta.get("lambda", 1.0))
    gfield = args.gamma_field if args.gamma_field is not None else float(meta.get("gamma_field", 0.1))
    model = build_ladder(stars, lam, gfield)
    report = fit_gamma(refs, model, args.fidelity, args.bath_kind, grid, h=args.rk4_h, jobs=args.jobs)
    if args.output:
        write_atomic(args.output, report.to_csv())
    print(report.summary())
    return EXIT_OK


def _reproduce_task(task):
    kind, case, params = task
    model = build_ladder(3, 1.0, 0.1)
    spec = quench(model, 1, CASES[case], 10.0, 8)
    fine = default_grid(10.0, params["grid"])
    if kind == "exact":
        return evolve_quench_exact(model, spec, fine)
    if kind == "trotter":
        return evolve_trotter(model, spec)
    if kind == "sampled":
        return evolve_sampled(model, spec, params["shots"], params["seed"])
    bath = BathSpec(params["gamma"], params["bath"])
    return evolve_quench_lindblad(model, spec, bath, 0.85, fine, h=params["rk4_h"])


def reproduce(figure: str, outdir: str | Path, shots: int = 1000, seed: int = 0, grid: int = 100,
              rk4_h: float = DEFAULT_STEP, jobs: int = 1) -> dict:
    """Write one CSV per curve plus ``manifest.json``; returns the manifest."""
    if figure not in FIGURES:
        raise UsageError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    outdir = Path(outdir)
    base = {"grid": grid, "shots": shots, "seed": seed, "rk4_h": rk4_h}
    manifest: dict = {"figure": figure, "files": []}
    if figure == "supp-trotter":
        model = build_ladder(3, 1.0, 0.1)
        table = trotter_error_table(model, range(1, 33), 10.0, jobs)
        name = "trotter_error.csv"
        write_atomic(outdir / name, "n,error\n" + "".join(f"{r.n},{r.error!r}\n" for r in table))
        manifest["files"].append({"file": name, "curve": "trotter error vs n", "T": 10.0})
        write_atomic(outdir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
        return manifest

    tasks = []
    if figure == "fig2-upper":
        tasks = [(m, c, base) for c in CASES for m in ("exact", "trotter")]
    elif figure == "fig2-lower":
        lind = {**base, "gamma": 0.008, "bath": "isotropic"}
        tasks = [(m, c, lind) for c in CASES for m in ("sampled", "lindblad")]
    elif figure == "supp-gamma":
        tasks = [("lindblad", "iii", {**base, "gamma": g, "bath": "isotropic"}) for g in (0.006, 0.008, 0.010)]
    elif figure == "supp-zbath":
        tasks = [("lindblad", c, {**base, "gamma": 0.05, "bath": "z_only"}) for c in CASES]

    results = parallel_map(_reproduce_task, tasks, jobs)
    for (kind, case, params), series in zip(tasks, results):
        stem = f"case-{case}_{kind}"
        if kind == "lindblad":
            stem += f"_{params['bath']}_gamma-{params['gamma']:g}"
        name = stem + ".csv"
        series.write(outdir / name)
        entry = {"file": name, "case": case, "visons": list(CASES[case]), "method": kind}
        if kind == "lindblad":
            entry.update(gamma=params["gamma"], bath=params["bath"], p=0.85)
        manifest["files"].append(entry)
    if figure == "supp-gamma":
        ref = results[1].stars
        manifest["residuals_vs_gamma_0.008"] = {
            f"{g:g}": float(np.abs(s.stars - ref).mean()) for g, s in zip((0.006, 0.008, 0.010), results)
        }
    write_atomic(outdir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    return manifest


def cmd_reproduce(args) -> int:
    outdir = Path(args.output) / args.figure
    manifest = reproduce(args.figure, outdir, args.shots, args.seed, args.grid, args.rk4_h, args.jobs)
    for entry in manifest["files"]:
        print(outdir / entry["file"])
    print(outdir / "manifest.json")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "calibrate-trotter": cmd_calibrate_trotter,
    "fit-gamma": cmd_fit_gamma,
    "reproduce": cmd_reproduce,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (PositivityError, ConvergenceError, ThresholdUnreachable, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
