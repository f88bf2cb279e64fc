"""Ground-truth emission simulator."""

from .circuit import (
    MS,
    X,
    Y,
    CircuitSpec,
    NativeGate,
    circuit_from_dict,
    empty_circuit,
    load_circuit,
    ms_pairs_circuit,
    save_circuit,
    x_sweep_circuit,
)
from .config import (
    SAMPLE_RATE_HZ,
    TABLE_ONE_ALIAS_HZ,
    DecoyConfig,
    EmissionConfig,
    config_from_text,
    config_to_text,
    load_config,
    save_config,
)
from .synth import GroundTruth, ShotTruth, TruthPulse, apply_decoys, duration_for, inject_interference, synthesize
