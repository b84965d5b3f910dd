"""Phase II control charting: sequential permutation tests on part diagrams.

The monitored statistic is fixed for a whole run (it only involves the
Phase I reference set); the control limit is the alpha-percentile of each
step's null distribution, so the limit adapts while the statistic stays
put. A combined chart monitors several homology dimensions and signals
when any one of them rejects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ValidationError
from .filtration import DEFAULT_SIMPLEX_BUDGET, build_rips
from .geometry import PointCloud, pairwise_distances
from .inference import DISTANCE_KINDS, ReferenceSet, build_reference, permutation_test
from .persistence import PersistenceDiagram, persistence

__all__ = [
    "ChartConfig",
    "ChartStep",
    "RunLengthSample",
    "compute_diagram",
    "build_phase1",
    "chart_step",
    "monitor_stream",
    "write_chart_trace",
]


@dataclass(frozen=True)
class ChartConfig:
    alpha: float = 0.05
    m0: int = 200
    dims: tuple[int, ...] = (0, 1)
    distance: str = "duration"
    max_steps: int = 1000
    max_diameter: float | None = None
    simplex_budget: int = DEFAULT_SIMPLEX_BUDGET
    wasserstein_p: float = 2.0
    wasserstein_ground: str = "linf"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.m0 < 2:
            raise ValidationError(f"m0 must be >= 2, got {self.m0}")
        if self.max_steps < 1:
            raise ValidationError(f"max_steps must be >= 1, got {self.max_steps}")
        dims = tuple(sorted(set(int(d) for d in self.dims)))
        if dims not in ((0,), (1,), (0, 1)):
            raise ValidationError(f"dims must be (0,), (1,) or (0, 1), got {self.dims}")
        object.__setattr__(self, "dims", dims)
        if self.distance not in DISTANCE_KINDS:
            raise ValidationError(f"unknown distance {self.distance!r}")

    @property
    def max_dimension(self) -> int:
        return max(self.dims) + 1


@dataclass(frozen=True)
class ChartStep:
    """One monitored part: per-dimension test results and the OR-rule signal."""

    part_index: int
    p_values: dict[int, float]
    observed_stats: dict[int, float]
    alpha_limits: dict[int, float]
    signal: bool


@dataclass(frozen=True)
class RunLengthSample:
    run_length: int
    censored: bool

    def __post_init__(self):
        if self.run_length < 1:
            raise ValidationError(f"run_length must be >= 1, got {self.run_length}")


def compute_diagram(cloud: PointCloud, cfg: ChartConfig) -> PersistenceDiagram:
    """Persistence diagram of one part at the chart's filtration settings."""
    dm = pairwise_distances(cloud)
    f = build_rips(dm, cfg.max_dimension, cfg.max_diameter, cfg.simplex_budget)
    return persistence(f, cloud.label)


def build_phase1(clouds: Iterable[PointCloud], cfg: ChartConfig) -> dict[int, ReferenceSet]:
    """Compute each Phase I diagram once and build one reference per dimension."""
    diagrams = [compute_diagram(c, cfg) for c in clouds]
    if len(diagrams) != cfg.m0:
        raise ValidationError(f"expected m0={cfg.m0} Phase I clouds, got {len(diagrams)}")
    return {
        dim: build_reference(diagrams, dim, cfg.distance,
                             wasserstein_p=cfg.wasserstein_p,
                             wasserstein_ground=cfg.wasserstein_ground)
        for dim in cfg.dims
    }


def chart_step(refs: Mapping[int, ReferenceSet], y_cloud: PointCloud,
               cfg: ChartConfig, part_index: int = 1) -> ChartStep:
    """Test one new part against the Phase I references, all monitored dims."""
    for dim in cfg.dims:
        if dim not in refs:
            raise ValidationError(f"no reference set for monitored dimension {dim}")
    diagram = compute_diagram(y_cloud, cfg)
    p_values: dict[int, float] = {}
    observed: dict[int, float] = {}
    limits: dict[int, float] = {}
    for dim in cfg.dims:
        res = permutation_test(refs[dim], diagram, cfg.alpha)
        p_values[dim] = res.p_value
        observed[dim] = res.observed_stat
        limits[dim] = res.alpha_limit
    signal = any(p_values[dim] <= cfg.alpha for dim in cfg.dims)
    return ChartStep(part_index, p_values, observed, limits, signal)


def monitor_stream(refs: Mapping[int, ReferenceSet], part_source: Iterable[PointCloud],
                   cfg: ChartConfig) -> tuple[RunLengthSample, list[ChartStep]]:
    """Run chart_step on parts from the source until the first signal.

    Stops at the first signal or after max_steps parts (censored). A source
    that dries up early also censors at however many parts it yielded.
    """
    steps: list[ChartStep] = []
    for i, cloud in enumerate(part_source, start=1):
        step = chart_step(refs, cloud, cfg, part_index=i)
        steps.append(step)
        if step.signal:
            return RunLengthSample(i, False), steps
        if i >= cfg.max_steps:
            return RunLengthSample(i, True), steps
    if not steps:
        raise ValidationError("part source yielded no parts")
    return RunLengthSample(len(steps), True), steps


def write_chart_trace(steps: Iterable[ChartStep], path) -> None:
    """Plot-ready trace CSV, one row per (part, monitored dimension)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("part_index,dim,observed_stat,alpha_limit,p_value,signal\n")
        for s in steps:
            for dim in sorted(s.p_values):
                limit = s.alpha_limits[dim]
                limit_txt = "nan" if math.isnan(limit) else repr(float(limit))
                fh.write(
                    f"{s.part_index},{dim},{float(s.observed_stats[dim])!r},"
                    f"{limit_txt},{float(s.p_values[dim])!r},{int(s.signal)}\n"
                )
