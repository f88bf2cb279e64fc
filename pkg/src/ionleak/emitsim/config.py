"""Emission-chain configuration and its flat ``key = value`` file format.

List values are comma-separated; structured entries separate their fields
with colons, e.g.::

    addressing_freq_hz = 129.6545e6, 130.992e6, 132.45e6
    ms_duration_s      = 0:1:232.5e-6, 0:2:229.9e-6, 1:2:222.3e-6
    region_a_template  = 142.88e6:400e-6, 146.38e6:350e-6
    inject_noise       = 0:61.44e6:5.0

Lines starting with ``#`` are comments.  Unknown keys are rejected.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigInvalid

SAMPLE_RATE_HZ = 122.88e6
TABLE_ONE_ALIAS_HZ = (6.7745e6, 8.112e6, 9.57e6)
# ions beyond the three measured ones continue the ~1.4 MHz alias ladder
_EXTRA_ALIAS_HZ = (11.0e6, 12.45e6, 13.9e6, 15.35e6)
DEFAULT_ADDRESSING_HZ = tuple(SAMPLE_RATE_HZ + f for f in TABLE_ONE_ALIAS_HZ + _EXTRA_ALIAS_HZ)
DEFAULT_RABI = 2 * math.pi * 12.5e3
DEFAULT_MS_DURATION_S = {(0, 1): 232.5e-6, (0, 2): 229.9e-6, (1, 2): 222.3e-6}
DEFAULT_REGION_A = ((142.88e6, 400e-6), (146.38e6, 350e-6), (149.88e6, 320e-6))
DEFAULT_REGION_C = ((142.88e6, 500e-6), (152.88e6, 350e-6), (156.88e6, 400e-6))


@dataclass(frozen=True)
class DecoyConfig:
    n_decoys: int = 2
    rng_seed: int = 0
    gate_rate: float = 1.0

    def __post_init__(self):
        if self.n_decoys < 1:
            raise ConfigInvalid("n_decoys must be >= 1")
        if self.gate_rate < 0:
            raise ConfigInvalid("gate_rate must be non-negative")


@dataclass(frozen=True)
class EmissionConfig:
    """Parameters of the simulated control chain and acquisition front-end.

    Frequencies are true (pre-sampling) tone frequencies; durations are
    seconds.  Per-ion sequences are indexed by ion; a single entry applies
    to every ion.
    """

    sample_rate_hz: float = SAMPLE_RATE_HZ
    addressing_freq_hz: tuple[float, ...] = DEFAULT_ADDRESSING_HZ
    rabi_rad_per_s: tuple[float, ...] = (DEFAULT_RABI,)
    pad_s: float = 10e-6
    ms_duration_s: dict = field(default_factory=lambda: dict(DEFAULT_MS_DURATION_S))
    ms_default_duration_s: float = 230e-6
    shot_gap_s: float = 2.5e-3
    gate_gap_s: float = 20e-6
    region_gap_s: float = 50e-6
    template_gap_s: float = 20e-6
    lead_in_s: float = 50e-6
    edge_s: float = 2e-6
    amplitude: float = 1.0
    region_a_template: tuple[tuple[float, float], ...] = DEFAULT_REGION_A
    region_c_template: tuple[tuple[float, float], ...] = DEFAULT_REGION_C
    noise_sigma: float = 0.01
    bandpass_hz: tuple[float, float] = (27.5e6, 200e6)
    duration_sigma_s: tuple[float, ...] = (0.0,)
    freq_sigma_hz: tuple[float, ...] = (0.0,)
    ms_duration_sigma_s: dict = field(default_factory=dict)
    prep_amplitude: float = 0.0
    prep_freq_hz: float = 85e6
    prep_step_hz: float = 0.5e6
    decoy: DecoyConfig | None = None
    inject_noise: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        for name in ("addressing_freq_hz", "rabi_rad_per_s", "duration_sigma_s", "freq_sigma_hz"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        for name in ("ms_duration_s", "ms_duration_sigma_s"):
            object.__setattr__(self, name, {_pair(k): float(v) for k, v in getattr(self, name).items()})
        for name in ("region_a_template", "region_c_template"):
            object.__setattr__(self, name, tuple((float(f), float(d)) for f, d in getattr(self, name)))
        object.__setattr__(self, "bandpass_hz", tuple(float(v) for v in self.bandpass_hz))
        object.__setattr__(self, "inject_noise", tuple(tuple(float(v) for v in e) for e in self.inject_noise))
        self.validate()

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigInvalid(msg)

        need(self.sample_rate_hz > 0, "sample_rate_hz must be positive")
        need(len(self.addressing_freq_hz) > 0, "addressing_freq_hz must list at least one ion")
        need(all(f > 0 for f in self.addressing_freq_hz), "addressing frequencies must be positive")
        need(len(self.rabi_rad_per_s) > 0 and all(r > 0 for r in self.rabi_rad_per_s),
             "rabi_rad_per_s must be positive")
        need(self.pad_s >= 0, "pad_s must be non-negative")
        need(all(d > 0 for d in self.ms_duration_s.values()) and self.ms_default_duration_s > 0,
             "MS durations must be positive")
        for name in ("gate_gap_s", "region_gap_s", "template_gap_s", "lead_in_s", "edge_s", "noise_sigma",
                     "prep_amplitude"):
            need(getattr(self, name) >= 0, f"{name} must be non-negative")
        need(self.amplitude > 0, "amplitude must be positive")
        for name in ("region_a_template", "region_c_template"):
            need(all(f > 0 and d > 0 for f, d in getattr(self, name)), f"{name} entries must be positive")
        low, high = self.bandpass_hz
        need(0 <= low < high, "bandpass_hz must satisfy 0 <= low < high")
        longest = max([self.ms_default_duration_s, *self.ms_duration_s.values(),
                       2 * math.pi / min(self.rabi_rad_per_s) + self.pad_s,
                       *(d for _, d in self.region_a_template + self.region_c_template)])
        need(self.shot_gap_s > longest, f"shot_gap_s must exceed the longest pulse ({longest:g} s)")
        for lo, hi, p in self.inject_noise:
            need(0 <= lo < hi <= self.sample_rate_hz / 2 and p >= 0,
                 "inject_noise entries need 0 <= low < high <= f_s/2 and power >= 0")

    @property
    def n_addressable(self) -> int:
        return len(self.addressing_freq_hz)

    def rabi_for(self, ion: int) -> float:
        return _per_ion(self.rabi_rad_per_s, ion)

    def ms_duration_for(self, ions) -> float:
        return self.ms_duration_s.get(_pair(ions), self.ms_default_duration_s)

    def alias_freqs_hz(self) -> tuple[float, ...]:
        from ..sigproc import fold_frequency

        return tuple(fold_frequency(f, self.sample_rate_hz) for f in self.addressing_freq_hz)

    def replace(self, **changes) -> EmissionConfig:
        return dataclasses.replace(self, **changes)


def _per_ion(values, ion):
    return values[ion] if len(values) > ion else values[-1]


def _pair(ions) -> tuple[int, int]:
    a, b = ions
    return (min(a, b), max(a, b))


# ---- flat file format -------------------------------------------------------

def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _records(text, width):
    out = []
    for entry in text.split(","):
        if not entry.strip():
            continue
        parts = entry.split(":")
        if len(parts) != width:
            raise ValueError(f"expected {width} colon-separated fields in {entry.strip()!r}")
        out.append(tuple(float(p) for p in parts))
    return tuple(out)


def _pair_map(text):
    return {(int(a), int(b)): v for a, b, v in _records(text, 3)}


_SCALARS = ("sample_rate_hz", "pad_s", "ms_default_duration_s", "shot_gap_s", "gate_gap_s", "region_gap_s",
            "template_gap_s", "lead_in_s", "edge_s", "amplitude", "noise_sigma", "prep_amplitude",
            "prep_freq_hz", "prep_step_hz")
_PARSERS = {
    **{k: float for k in _SCALARS},
    "addressing_freq_hz": _floats,
    "rabi_rad_per_s": _floats,
    "duration_sigma_s": _floats,
    "freq_sigma_hz": _floats,
    "bandpass_hz": _floats,
    "ms_duration_s": _pair_map,
    "ms_duration_sigma_s": _pair_map,
    "region_a_template": lambda t: _records(t, 2),
    "region_c_template": lambda t: _records(t, 2),
    "inject_noise": lambda t: _records(t, 3),
}
_DECOY_KEYS = {"decoy_n": ("n_decoys", int), "decoy_seed": ("rng_seed", int), "decoy_gate_rate": ("gate_rate", float)}


def config_from_text(text: str) -> EmissionConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[emission]\n" + text)
    except configparser.Error as exc:
        raise ConfigInvalid(f"malformed config: {exc}") from None
    kwargs, decoy = {}, {}
    for key, raw in parser["emission"].items():
        try:
            if key in _DECOY_KEYS:
                name, conv = _DECOY_KEYS[key]
                decoy[name] = conv(raw)
            elif key in _PARSERS:
                kwargs[key] = _PARSERS[key](raw)
            else:
                raise ConfigInvalid(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigInvalid(f"bad value for {key!r}: {exc}") from None
    if decoy:
        kwargs["decoy"] = DecoyConfig(**decoy)
    return EmissionConfig(**kwargs)


def load_config(path) -> EmissionConfig:
    return config_from_text(Path(path).read_text())


def config_to_text(cfg: EmissionConfig) -> str:
    def fmt(v):
        return repr(float(v))

    lines = []
    for key in _SCALARS:
        lines.append(f"{key} = {fmt(getattr(cfg, key))}")
    for key in ("addressing_freq_hz", "rabi_rad_per_s", "duration_sigma_s", "freq_sigma_hz", "bandpass_hz"):
        lines.append(f"{key} = " + ", ".join(fmt(v) for v in getattr(cfg, key)))
    for key in ("ms_duration_s", "ms_duration_sigma_s"):
        lines.append(f"{key} = " + ", ".join(f"{a}:{b}:{fmt(v)}" for (a, b), v in sorted(getattr(cfg, key).items())))
    for key in ("region_a_template", "region_c_template"):
        lines.append(f"{key} = " + ", ".join(f"{fmt(f)}:{fmt(d)}" for f, d in getattr(cfg, key)))
    lines.append("inject_noise = " + ", ".join(":".join(fmt(v) for v in e) for e in cfg.inject_noise))
    if cfg.decoy is not None:
        lines += [f"decoy_n = {cfg.decoy.n_decoys}", f"decoy_seed = {cfg.decoy.rng_seed}",
                  f"decoy_gate_rate = {fmt(cfg.decoy.gate_rate)}"]
    return "\n".join(lines) + "\n"


def save_config(cfg: EmissionConfig, path) -> None:
    Path(path).write_text(config_to_text(cfg))
