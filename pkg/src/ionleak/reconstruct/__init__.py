"""From pulse lists to shots, regions, ions, gate events and statistics."""

from .classify import (
    MS,
    SINGLE,
    AddressingTable,
    ClassifierConfig,
    GateEvent,
    assign_ions,
    classify_gates,
    default_addressing_table,
    overlap_fraction,
)
from .pipeline import Analysis, analyze_trace, profile_from_trace
from .shots import (
    BaselineProfile,
    Shot,
    TemplatePulse,
    label_regions,
    profile_baseline,
    segment_shots,
    shot_gaps,
)
from .stats import CSV_COLUMNS, PulseStats, StatsTable, aggregate_stats
from .unitary import gate_unitary, molmer_sorensen, rotation, sigma_phi
