"""Bounded-confidence opinion dynamics with a scheduled manipulator group."""

from .core import (
    ManipulatorGroup,
    ModelKind,
    ModelSpec,
    OpinionState,
    confidence_set,
    equispaced,
    extended_opinions,
    uniform_random,
)
from .kernels import BACKEND
from .models import StopKind, StopReason, StopRule, Trajectory, run_simulation
from .rng import SplitMix64, derive_seed

__all__ = [
    "BACKEND",
    "ManipulatorGroup",
    "ModelKind",
    "ModelSpec",
    "OpinionState",
    "SplitMix64",
    "StopKind",
    "StopReason",
    "StopRule",
    "Trajectory",
    "confidence_set",
    "derive_seed",
    "equispaced",
    "extended_opinions",
    "run_simulation",
    "uniform_random",
]
__version__ = "0.1.0"
