"""Controllable gridworld simulator and evaluation harness for probing
language-model hallucination against a fully known reference world."""

from __future__ import annotations

__version__ = "0.1.0"

from .levels import LevelError, LevelSpec, emit_level, parse_level
from .observe import SERIALIZERS, Observation, observe, render
from .probes import (
    CANNOT_DETERMINE,
    GroundTruth,
    Probe,
    compute_ground_truth,
    grade,
    register_probe_plugin,
)
from .trajectory import (
    RecorderSession,
    Trajectory,
    TrajectoryError,
    load_trajectory,
    replay,
    save_trajectory,
)
from .world import Action, World, init_world, simulate, step

__all__ = [
    "Action",
    "CANNOT_DETERMINE",
    "GroundTruth",
    "LevelError",
    "LevelSpec",
    "Observation",
    "Probe",
    "RecorderSession",
    "SERIALIZERS",
    "Trajectory",
    "TrajectoryError",
    "World",
    "compute_ground_truth",
    "emit_level",
    "grade",
    "init_world",
    "load_trajectory",
    "observe",
    "parse_level",
    "register_probe_plugin",
    "render",
    "replay",
    "save_trajectory",
    "simulate",
    "step",
]
