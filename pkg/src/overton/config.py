"""YAML run configuration: a validated schema that converts to library objects."""

from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import core, metrics
from .analytic import TwoGroupSystem
from .models import StopKind, StopRule, default_horizon
from .rng import SplitMix64, derive_seed
from .sweep import ExperimentConfig, SweepGrid


class ConfigError(ValueError):
    """A configuration file that cannot be parsed or fails the schema."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSection(_Strict):
    kind: core.ModelKind
    epsilon: float = Field(gt=0)


class Equispaced(_Strict):
    a: float = Field(-1.0, ge=-1, le=1)
    b: float = Field(1.0, ge=-1, le=1)
    n: int = Field(100, ge=1)


class UniformRandom(_Strict):
    n: int = Field(ge=1)
    seed: int = Field(ge=0)
    a: float = Field(-1.0, ge=-1, le=1)
    b: float = Field(1.0, ge=-1, le=1)


class PopulationSection(_Strict):
    equispaced: Optional[Equispaced] = None
    explicit: Optional[list[float]] = None
    uniform_random: Optional[UniformRandom] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        given = [k for k in ("equispaced", "explicit", "uniform_random") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError("give exactly one of equispaced / explicit / uniform_random")
        if self.explicit is not None:
            if not self.explicit:
                raise ValueError("explicit population is empty")
            if any(not -1.0 <= v <= 1.0 for v in self.explicit):
                raise ValueError("explicit opinions must lie in [-1, 1]")
        return self

    def opinions(self) -> np.ndarray:
        if self.equispaced is not None:
            e = self.equispaced
            return core.equispaced(e.a, e.b, e.n)
        if self.explicit is not None:
            return np.array(self.explicit, dtype=np.float64)
        u = self.uniform_random
        return core.uniform_random(u.n, SplitMix64(derive_seed(u.seed)), u.a, u.b)


class ManipulatorSection(_Strict):
    k: int = Field(0, ge=0)
    f_start: float = Field(-1.0, ge=-1, le=1)
    f_end: float = Field(1.0, ge=-1, le=1)
    t_delta: int = Field(0, ge=0)


class StopSection(_Strict):
    rule: Optional[StopKind] = None
    tol: float = Field(5e-4, gt=0)
    decimals: int = Field(3, ge=0)
    horizon: Optional[int] = Field(None, ge=0)


class MetricsSection(_Strict):
    delta: float = Field(0.5, ge=0)
    h: int = Field(metrics.DEFAULT_H, ge=2)
    alpha: float = Field(metrics.DEFAULT_ALPHA, gt=0)
    gap_tolerance: float = Field(metrics.DEFAULT_GAP_TOLERANCE, gt=0)


class IntRange(_Strict):
    start: int = 0
    stop: int
    step: int = Field(1, ge=1)

    def values(self) -> list[int]:
        # inclusive of stop, matching grids like t_delta in {10 j : j = 0..30}
        return list(range(self.start, self.stop + 1, self.step))


class SweepSection(_Strict):
    k_values: Union[list[int], IntRange]
    tdelta_values: Union[list[int], IntRange]
    replicates: Optional[int] = Field(None, ge=1)
    base_seed: Optional[int] = Field(None, ge=0)
    snapshots: Optional[list[Literal["t_delta", "final"]]] = None
    workers: Optional[int] = Field(None, ge=1)

    @field_validator("k_values", "tdelta_values")
    @classmethod
    def _nonempty(cls, v):
        values = v.values() if isinstance(v, IntRange) else v
        if not values:
            raise ValueError("grid axis is empty")
        if any(x < 0 for x in values):
            raise ValueError("grid values must be non-negative")
        return v

    @staticmethod
    def _expand(v) -> list[int]:
        return v.values() if isinstance(v, IntRange) else list(v)


class SimulateSection(_Strict):
    snapshot_every: int = Field(1, ge=1)
    snapshot_times: Optional[list[int]] = None


class OracleSection(_Strict):
    n_normal: int = Field(ge=1)
    k_manip: int = Field(ge=1)
    x0: float
    f0: float
    lam: float
    epsilon: float = Field(gt=0)
    steps: int = Field(1000, ge=1)
    horizon: int = Field(10000, ge=1)


class OutputSection(_Strict):
    dir: str = "out"
    svg: bool = False


class RunConfig(_Strict):
    model: Optional[ModelSection] = None
    population: Optional[PopulationSection] = None
    manipulators: ManipulatorSection = ManipulatorSection()
    stop: StopSection = StopSection()
    metrics: MetricsSection = MetricsSection()
    seed: int = Field(0, ge=0)
    sweep: Optional[SweepSection] = None
    simulate: SimulateSection = SimulateSection()
    oracle: Optional[OracleSection] = None
    output: OutputSection = OutputSection()

    # -- conversions -----------------------------------------------------

    def require(self, *sections: str) -> None:
        missing = [s for s in sections if getattr(self, s) is None]
        if missing:
            raise ConfigError("; ".join(f"{s}: section required for this command" for s in missing))

    def model_spec(self) -> core.ModelSpec:
        self.require("model")
        return core.ModelSpec(self.model.kind, self.model.epsilon)

    def group(self) -> core.ManipulatorGroup:
        m = self.manipulators
        return core.ManipulatorGroup(k=m.k, f_start=m.f_start, f_end=m.f_end, t_delta=m.t_delta)

    def stop_rule(self) -> StopRule:
        self.require("model")
        s = self.stop
        kind = s.rule if s.rule is not None else StopRule.for_model(self.model.kind).kind
        return StopRule(kind, tol=s.tol, decimals=s.decimals)

    def horizon(self) -> int:
        self.require("model")
        return default_horizon(self.model.kind) if self.stop.horizon is None else self.stop.horizon

    def rng(self) -> SplitMix64:
        """Stream for a single run: the same one replicate 0 of the sweep uses."""
        m = self.manipulators
        return SplitMix64(derive_seed(self.seed, m.k, m.t_delta, 0))

    def experiment(self) -> ExperimentConfig:
        self.require("model", "population")
        sw = self.sweep
        mt = self.metrics
        rule = self.stop_rule()
        return ExperimentConfig(
            kind=self.model.kind,
            epsilon=self.model.epsilon,
            init=self.population.opinions(),
            f_start=self.manipulators.f_start,
            f_end=self.manipulators.f_end,
            stop=rule,
            horizon=self.stop.horizon,
            snapshots=tuple(sw.snapshots) if sw is not None and sw.snapshots else None,
            delta=mt.delta,
            h=mt.h,
            alpha=mt.alpha,
            gap_tolerance=mt.gap_tolerance,
            base_seed=sw.base_seed if sw is not None and sw.base_seed is not None else self.seed,
        )

    def grid(self) -> SweepGrid:
        self.require("model", "sweep")
        sw = self.sweep
        reps = sw.replicates
        if reps is None:
            reps = 100 if self.model.kind.stochastic else 1
        return SweepGrid(SweepSection._expand(sw.k_values), SweepSection._expand(sw.tdelta_values), reps)

    def two_group(self) -> TwoGroupSystem:
        self.require("oracle")
        o = self.oracle
        return TwoGroupSystem(o.n_normal, o.k_manip, o.x0, o.f0, o.lam, o.epsilon)


# -- loading ---------------------------------------------------------------


def _line_of(node: Optional[yaml.Node], loc: tuple) -> Optional[int]:
    """1-based line of the deepest YAML node along a pydantic error path."""
    line = node.start_mark.line + 1 if node is not None else None
    for part in loc:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for key, value in node.value:
                if key.value == part:
                    nxt = value
                    line = key.start_mark.line + 1
                    break
            if nxt is None:
                break
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            node = node.value[part]
            line = node.start_mark.line + 1
        else:
            break
    return line


def _format_errors(err: ValidationError, root: Optional[yaml.Node], source: str) -> str:
    lines = []
    for e in err.errors():
        # drop union / tagged-branch noise from the path
        loc = tuple(p for p in e["loc"] if not (isinstance(p, str) and ("[" in p or p.startswith("function-"))))
        dotted = ".".join(str(p) for p in loc) or "<root>"
        msg = e["msg"]
        if e["type"] == "missing":
            msg = f"missing required key '{loc[-1] if loc else dotted}'"
        elif e["type"] == "extra_forbidden":
            msg = f"unknown key '{loc[-1] if loc else dotted}'"
        line = _line_of(root, loc)
        where = f"{source}:{line}" if line else source
        lines.append(f"{where}: {dotted}: {msg}")
    return "\n".join(lines)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ConfigError(f"{where}: YAML syntax error: {getattr(exc, 'problem', exc)}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}:1: top level must be a mapping")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc, root, source)) from exc


def load_config(path: Union[str, Path]) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config: {exc.strerror}") from exc
    return parse_config(text, str(p))
