"""Circuits over the native trapped-ion gate set and their JSON form.

JSON layout::

    {"n_ions": 3, "n_shots": 1,
     "gates": [{"kind": "Rx", "ions": [0], "theta": 3.14159, "i": 0, "j": 1},
               {"kind": "MS", "ions": [0, 1]}]}

``theta`` defaults to pi for rotations and is fixed to pi/2 for MS;
``i``/``j`` default to levels 0 and 1.  An optional boolean ``decoy``
marks gates inserted for obfuscation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigInvalid

GATE_KINDS = ("Rx", "Ry", "MS")
MS_THETA = math.pi / 2


@dataclass(frozen=True)
class NativeGate:
    kind: str
    ions: tuple[int, ...]
    theta_rad: float = math.pi
    level_i: int = 0
    level_j: int = 1
    decoy: bool = False

    def __post_init__(self):
        object.__setattr__(self, "ions", tuple(int(i) for i in self.ions))
        if self.kind not in GATE_KINDS:
            raise ConfigInvalid(f"unknown gate kind {self.kind!r}; expected one of {GATE_KINDS}")
        if self.kind == "MS":
            if len(self.ions) != 2 or self.ions[0] == self.ions[1]:
                raise ConfigInvalid(f"MS needs two distinct ions, got {self.ions}")
            if not math.isclose(self.theta_rad, MS_THETA):
                object.__setattr__(self, "theta_rad", MS_THETA)
        else:
            if len(self.ions) != 1:
                raise ConfigInvalid(f"{self.kind} acts on exactly one ion, got {self.ions}")
            if not 0 < self.theta_rad <= 2 * math.pi:
                raise ConfigInvalid(f"rotation angle {self.theta_rad} outside (0, 2pi]")
        if not 0 <= self.level_i < self.level_j:
            raise ConfigInvalid(f"levels must satisfy 0 <= i < j, got ({self.level_i}, {self.level_j})")
        if any(i < 0 for i in self.ions):
            raise ConfigInvalid(f"negative ion index in {self.ions}")

    @property
    def phase_rad(self) -> float:
        return math.pi / 2 if self.kind == "Ry" else 0.0

    @property
    def ion_set(self) -> frozenset:
        return frozenset(self.ions)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "ions": list(self.ions), "theta": self.theta_rad,
             "i": self.level_i, "j": self.level_j}
        if self.decoy:
            d["decoy"] = True
        return d


@dataclass(frozen=True)
class CircuitSpec:
    n_ions: int
    gates: tuple[NativeGate, ...] = field(default_factory=tuple)
    n_shots: int = 1

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_ions < 1:
            raise ConfigInvalid("n_ions must be positive")
        if self.n_shots < 1:
            raise ConfigInvalid("n_shots must be positive")
        for k, g in enumerate(self.gates):
            if max(g.ions) >= self.n_ions:
                raise ConfigInvalid(f"gate {k} acts on ion {max(g.ions)} but circuit has {self.n_ions} ions")

    def to_dict(self) -> dict:
        return {"n_ions": self.n_ions, "n_shots": self.n_shots,
                "gates": [g.to_dict() for g in self.gates]}

    def with_shots(self, n_shots: int) -> CircuitSpec:
        return CircuitSpec(self.n_ions, self.gates, n_shots)


def X(ion: int) -> NativeGate:
    return NativeGate("Rx", (ion,), math.pi)


def Y(ion: int) -> NativeGate:
    return NativeGate("Ry", (ion,), math.pi)


def MS(a: int, b: int) -> NativeGate:
    return NativeGate("MS", (a, b), MS_THETA)


def x_sweep_circuit(n_ions: int = 3, repeats: int = 10, n_shots: int = 1) -> CircuitSpec:
    """X on each ion in turn, the whole sweep repeated ``repeats`` times."""
    gates = [X(q) for _ in range(repeats) for q in range(n_ions)]
    return CircuitSpec(n_ions, gates, n_shots)


def ms_pairs_circuit(n_ions: int = 3, repeats: int = 10, n_shots: int = 1) -> CircuitSpec:
    """MS on every ion pair (ordered (0,1), (0,2), (1,2), ...), repeated."""
    pairs = [(a, b) for a in range(n_ions) for b in range(a + 1, n_ions)]
    gates = [MS(a, b) for _ in range(repeats) for a, b in pairs]
    return CircuitSpec(n_ions, gates, n_shots)


def empty_circuit(n_ions: int = 3, n_shots: int = 1) -> CircuitSpec:
    return CircuitSpec(n_ions, (), n_shots)


def _require(cond, msg):
    if not cond:
        raise ConfigInvalid(msg)


def circuit_from_dict(doc: dict) -> CircuitSpec:
    _require(isinstance(doc, dict), "circuit document must be a JSON object")
    extra = set(doc) - {"n_ions", "n_shots", "gates"}
    _require(not extra, f"unknown circuit keys: {sorted(extra)}")
    _require(isinstance(doc.get("n_ions"), int), "'n_ions' must be an integer")
    n_shots = doc.get("n_shots", 1)
    _require(isinstance(n_shots, int), "'n_shots' must be an integer")
    raw = doc.get("gates", [])
    _require(isinstance(raw, list), "'gates' must be a list")
    gates = []
    for k, g in enumerate(raw):
        _require(isinstance(g, dict), f"gates[{k}] must be an object")
        extra = set(g) - {"kind", "ions", "theta", "i", "j", "decoy"}
        _require(not extra, f"gates[{k}] has unknown keys {sorted(extra)}")
        _require("kind" in g and "ions" in g, f"gates[{k}] needs 'kind' and 'ions'")
        _require(isinstance(g["ions"], list) and all(isinstance(i, int) for i in g["ions"]),
                 f"gates[{k}].ions must be a list of integers")
        theta = g.get("theta", MS_THETA if g["kind"] == "MS" else math.pi)
        _require(isinstance(theta, (int, float)), f"gates[{k}].theta must be a number")
        try:
            gates.append(NativeGate(g["kind"], tuple(g["ions"]), float(theta),
                                    int(g.get("i", 0)), int(g.get("j", 1)), bool(g.get("decoy", False))))
        except ConfigInvalid as exc:
            raise ConfigInvalid(f"gates[{k}]: {exc}") from None
    return CircuitSpec(doc["n_ions"], gates, n_shots)


def load_circuit(path) -> CircuitSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: not valid JSON ({exc})") from None
    return circuit_from_dict(doc)


def save_circuit(circuit: CircuitSpec, path) -> None:
    Path(path).write_text(json.dumps(circuit.to_dict(), indent=2) + "\n")
