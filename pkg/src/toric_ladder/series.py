"""Time series of star/plaquette expectations and their CSV form.

CSV layout::

    # key=value          (one line per metadata entry)
    time,A1,...,AL,B1,...,B(L+1)[,trace,min_eig,herm_err]
    0.0,-1.0,...

``B`` cells are empty for shot-sampled runs. The trailing diagnostic columns
appear only for density-matrix runs. Floats are written with ``repr`` so a
parse reproduces the in-memory series bit for bit.
"""
from __future__ import annotations

import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

DIAGNOSTIC_COLUMNS = ("trace", "min_eig", "herm_err")


@dataclass
class ObservableSeries:
    times: np.ndarray
    stars: np.ndarray
    plaquettes: np.ndarray | None = None
    metadata: dict[str, Any] = field(default_factory=dict)
    diagnostics: dict[str, np.ndarray] | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.stars = np.atleast_2d(np.asarray(self.stars, dtype=float))
        if self.plaquettes is not None:
            self.plaquettes = np.atleast_2d(np.asarray(self.plaquettes, dtype=float))
        if self.times.ndim != 1 or len(self.times) != len(self.stars):
            raise ValueError("times and star rows disagree in length")
        if len(self.times) and self.times[0] != 0:
            raise ValueError(f"series must start at t=0, got {self.times[0]}")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def n_stars(self) -> int:
        return self.stars.shape[1]

    @property
    def method(self) -> str | None:
        return self.metadata.get("method")

    def check_bounds(self, tol: float = 1e-9) -> None:
        for name, arr in (("A", self.stars), ("B", self.plaquettes)):
            if arr is not None and np.any(np.abs(arr) > 1 + tol):
                raise ValueError(f"{name} expectation outside [-1, 1]")

    def columns(self) -> list[str]:
        cols = ["time"] + [f"A{s + 1}" for s in range(self.n_stars)]
        cols += [f"B{p + 1}" for p in range(self.n_stars + 1)]
        if self.diagnostics:
            cols += [c for c in DIAGNOSTIC_COLUMNS if c in self.diagnostics]
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}={_fmt_meta(value)}\n")
        cols = self.columns()
        buf.write(",".join(cols) + "\n")
        n_b = self.n_stars + 1
        diag = [c for c in cols if c in DIAGNOSTIC_COLUMNS]
        for k, t in enumerate(self.times):
            row = [repr(float(t))] + [repr(float(v)) for v in self.stars[k]]
            if self.plaquettes is None:
                row += [""] * n_b
            else:
                row += [repr(float(v)) for v in self.plaquettes[k]]
            row += [repr(float(self.diagnostics[c][k])) for c in diag]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    def write(self, path: str | os.PathLike) -> Path:
        return write_atomic(path, self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> ObservableSeries:
        metadata: dict[str, Any] = {}
        lines = text.splitlines()
        k = 0
        while k < len(lines) and lines[k].startswith("#"):
            body = lines[k][1:].strip()
            if "=" not in body:
                raise ValueError(f"metadata line without '=': {lines[k]!r}")
            key, value = body.split("=", 1)
            metadata[key.strip()] = _parse_meta(value.strip())
            k += 1
        if k >= len(lines):
            raise ValueError("missing CSV header")
        header = lines[k].split(",")
        if header[0] != "time":
            raise ValueError(f"first column must be 'time', got {header[0]!r}")
        a_cols = [c for c in header if c.startswith("A")]
        b_cols = [c for c in header if c.startswith("B")]
        n_stars = len(a_cols)
        if n_stars < 1 or a_cols != [f"A{s + 1}" for s in range(n_stars)]:
            raise ValueError(f"bad star columns {a_cols}")
        if b_cols != [f"B{p + 1}" for p in range(n_stars + 1)]:
            raise ValueError(f"expected B1..B{n_stars + 1}, got {b_cols}")
        extra = header[1 + 2 * n_stars + 1:]
        if any(c not in DIAGNOSTIC_COLUMNS for c in extra):
            raise ValueError(f"unknown columns {extra}")
        rows = [ln.split(",") for ln in lines[k + 1:] if ln.strip()]
        for r in rows:
            if len(r) != len(header):
                raise ValueError(f"row has {len(r)} fields, header has {len(header)}")
        times = np.array([float(r[0]) for r in rows])
        stars = np.array([[float(v) for v in r[1:1 + n_stars]] for r in rows]).reshape(len(rows), n_stars)
        b_cells = [r[1 + n_stars:2 + 2 * n_stars] for r in rows]
        blank = [all(c == "" for c in cells) for cells in b_cells]
        if all(blank):
            plaquettes = None
        elif any(blank):
            raise ValueError("plaquette columns are blank on some rows only")
        else:
            plaquettes = np.array([[float(v) for v in cells] for cells in b_cells])
        diagnostics = None
        if extra:
            off = 2 + 2 * n_stars
            diagnostics = {c: np.array([float(r[off + i]) for r in rows]) for i, c in enumerate(extra)}
        return cls(times, stars, plaquettes, metadata, diagnostics)

    @classmethod
    def read(cls, path: str | os.PathLike) -> ObservableSeries:
        return cls.from_csv(Path(path).read_text())


def _fmt_meta(value: Any) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, tuple):
        value = list(value)
    return json.dumps(value)


def _parse_meta(text: str) -> Any:
    try:
        return json.loads(text)
    except ValueError:
        return text


def write_atomic(path: str | os.PathLike, text: str) -> Path:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
