"""String-stability analysis and simulation of mixed CAV/HDV traffic with
looking-ahead (MPF) and looking-behind (MSL) mixed platoons."""

from .composition import (
    PlatoonPartition,
    SegmentKind,
    Topology,
    TrafficComposition,
    VehicleClass,
    partition,
    sample_composition,
    segment_probabilities,
)
from .frequency import FrequencyGrid, Scenario, find_critical_penetration, string_stability
from .lqr import LqrWeights, SynthesisError, synthesize
from .models import CaccParams, OvmParams, equilibrium_from_velocity, linearize
from .sim import CollisionError, SimConfig, run

__all__ = [
    "CaccParams",
    "CollisionError",
    "FrequencyGrid",
    "LqrWeights",
    "OvmParams",
    "PlatoonPartition",
    "Scenario",
    "SegmentKind",
    "SimConfig",
    "SynthesisError",
    "Topology",
    "TrafficComposition",
    "VehicleClass",
    "equilibrium_from_velocity",
    "find_critical_penetration",
    "linearize",
    "partition",
    "run",
    "sample_composition",
    "segment_probabilities",
    "string_stability",
    "synthesize",
]
