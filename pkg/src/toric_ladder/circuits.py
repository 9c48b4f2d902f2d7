"""Preparation and Trotter circuits for the ladder quench, plus a text format.

Text format, one gate per line with 1-based qubit labels::

    H 1
    CNOT 1,2
    RZ 4,-2.5

Blank lines and lines starting with ``#`` are ignored.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import Circuit, Gate
from .lattice import LadderModel, PauliString


@dataclass(frozen=True)
class VisonConfig:
    """One sign per plaquette; ``-1`` marks a vison."""

    signs: tuple[int, ...]

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (1, -1) for s in signs):
            raise ValueError(f"vison signs must be +1/-1, got {signs}")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def none(cls, stars: int) -> VisonConfig:
        return cls((1,) * (stars + 1))

    @classmethod
    def from_plaquettes(cls, stars: int, plaquettes: Iterable[int]) -> VisonConfig:
        """Visons on the given 1-based plaquette labels."""
        signs = [1] * (stars + 1)
        for p in plaquettes:
            if not 1 <= p <= stars + 1:
                raise ValueError(f"plaquette {p} out of range 1..{stars + 1}")
            signs[p - 1] = -1
        return cls(tuple(signs))

    @property
    def plaquettes(self) -> tuple[int, ...]:
        return tuple(p + 1 for p, s in enumerate(self.signs) if s == -1)


@dataclass(frozen=True)
class QuenchSpec:
    spinon_star: int | None
    visons: VisonConfig
    total_time: float = 10.0
    trotter_steps: int = 8

    def __post_init__(self):
        if self.trotter_steps < 1:
            raise ValueError(f"trotter_steps must be >= 1, got {self.trotter_steps}")
        if self.total_time < 0:
            raise ValueError(f"total_time must be >= 0, got {self.total_time}")

    def validate(self, model: LadderModel) -> None:
        if len(self.visons.signs) != model.n_plaquettes:
            raise ValueError(
                f"vison config has {len(self.visons.signs)} signs, ladder has {model.n_plaquettes} plaquettes"
            )
        if self.spinon_star is not None and not 1 <= self.spinon_star <= model.stars:
            raise ValueError(f"spinon star {self.spinon_star} out of range 1..{model.stars}")


def quench(
    model: LadderModel,
    spinon_star: int | None = 1,
    visons: Sequence[int] = (),
    total_time: float = 10.0,
    trotter_steps: int = 8,
) -> QuenchSpec:
    """Convenience constructor taking vison plaquette labels."""
    spec = QuenchSpec(spinon_star, VisonConfig.from_plaquettes(model.stars, visons), total_time, trotter_steps)
    spec.validate(model)
    return spec


def spinon_qubit(model: LadderModel, star: int) -> int:
    """0-based top-leg qubit whose X flips only ``star``."""
    if star == 1:
        return 0
    if star == model.stars:
        return 2 * model.stars
    raise ValueError(
        f"a single X gate cannot create a lone spinon on interior star {star}; "
        f"only stars 1 and {model.stars} sit next to a boundary qubit"
    )


def prep_circuit(model: LadderModel, spec: QuenchSpec) -> Circuit:
    """Column Bell pairs, then an optional spinon flip and vison phase flips."""
    spec.validate(model)
    gates = [Gate("H", (2 * c,)) for c in range(model.n_plaquettes)]
    gates += [Gate("CNOT", (2 * c, 2 * c + 1)) for c in range(model.n_plaquettes)]
    if spec.spinon_star is not None:
        gates.append(Gate("X", (spinon_qubit(model, spec.spinon_star),)))
    gates += [Gate("Z", (2 * (p - 1),)) for p in spec.visons.plaquettes]
    return tuple(gates)


def star_exponential_circuit(star: PauliString, theta: float) -> Circuit:
    """Gates implementing ``exp(+i theta star)`` for a four-qubit Z-string.

    A CNOT ladder folds the parity into the last qubit, an Rz of ``-2 theta``
    applies the phase, and the ladder is undone.
    """
    if star.phase != 0 or len(star.terms) != 4 or any(a != "Z" for _, a in star.terms):
        raise ValueError(f"expected a four-qubit Z-string, got {star}")
    q = star.qubits
    ladder = [Gate("CNOT", (q[k], q[k + 1])) for k in range(3)]
    return tuple(ladder + [Gate("RZ", (q[3],), -2.0 * theta)] + ladder[::-1])


def step_angles(model: LadderModel, dt: float) -> tuple[float, float]:
    """Exponent coefficients ``(lambda*dt, Gamma*dt)`` of one Trotter step."""
    return model.lam * dt, model.gamma_field * dt


def trotter_step_circuit(model: LadderModel, dt: float) -> Circuit:
    """One first-order step: all star exponentials, then ``exp(i Gamma dt X_j)`` on every qubit."""
    theta_star, theta_field = step_angles(model, dt)
    gates: list[Gate] = []
    for star in model.star_ops:
        gates.extend(star_exponential_circuit(star, theta_star))
    gates += [Gate("RX", (j,), -2.0 * theta_field) for j in range(model.n_qubits)]
    return tuple(gates)


def trotter_circuit(model: LadderModel, spec: QuenchSpec) -> Circuit:
    step = trotter_step_circuit(model, spec.total_time / spec.trotter_steps)
    return step * spec.trotter_steps


def full_circuit(model: LadderModel, spec: QuenchSpec) -> Circuit:
    return prep_circuit(model, spec) + trotter_circuit(model, spec)


def dumps(circuit: Iterable[Gate]) -> str:
    lines = []
    for g in circuit:
        args = [str(t + 1) for t in g.targets]
        if g.theta is not None:
            args.append(repr(g.theta))
        lines.append(f"{g.kind} {','.join(args)}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Circuit:
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            kind, args = line.split(None, 1)
            parts = [a.strip() for a in args.split(",")]
            kind = kind.upper()
            n_targets = 2 if kind == "CNOT" else 1
            targets = tuple(int(p) - 1 for p in parts[:n_targets])
            rest = parts[n_targets:]
            theta = float(rest[0]) if rest else None
            if len(rest) > 1:
                raise ValueError("too many fields")
            gates.append(Gate(kind, targets, theta))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}: {exc}") from None
    return tuple(gates)
