"""Experiment driver: run-length Monte Carlo studies and p-value power studies.

Every experiment is fully determined by its configuration (including the
base seed): replications draw independent Philox streams derived from
(base_seed, replication, part index), so they can run in any order or in
parallel and still produce byte-identical result files.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import kstwobign

from .errors import ValidationError
from .geometry import PointCloud
from .inference import permutation_test
from .partgen import (
    DefectSpec,
    NoiseSpec,
    Wireframe,
    add_noise,
    apply_defect,
    gen_cube,
    gen_cube_lattice,
    gen_egg_like_lattice,
    gen_layered_tube,
    sample_cloud,
)
from .spc import ChartConfig, build_phase1, compute_diagram, monitor_stream

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "RunLengthSummary",
    "KSResult",
    "GeometricReference",
    "make_wireframe",
    "part_seed",
    "run_length_experiment",
    "pvalue_power_study",
    "ks_uniformity_test",
    "geometric_reference",
]

_GENERATORS = {
    "cube": (gen_cube, ("edge", "spacing")),
    "tube": (gen_layered_tube, ("edge", "layers", "spacing")),
    "lattice": (gen_cube_lattice, ("nx", "ny", "nz", "cell_edge", "spacing")),
    "egg": (gen_egg_like_lattice, ("rings", "struts_per_ring", "height", "radius", "spacing")),
}


def make_wireframe(recipe: dict) -> Wireframe:
    """Build a part wireframe from a {'kind': ..., params...} recipe."""
    recipe = dict(recipe)
    kind = recipe.pop("kind", None)
    if kind not in _GENERATORS:
        raise ValidationError(f"unknown part kind {kind!r}; choose from {sorted(_GENERATORS)}")
    fn, params = _GENERATORS[kind]
    unknown = set(recipe) - set(params)
    if unknown:
        raise ValidationError(f"unknown {kind} parameters: {sorted(unknown)}")
    return fn(**recipe)


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation study: part recipe, optional defect, noise, chart, seeds."""

    part: dict
    chart: ChartConfig
    sigma: float
    replications: int
    base_seed: int
    defect: dict | None = None   # DefectSpec fields; onset handled separately
    onset: int = 1               # first monitored part index carrying the defect
    phase1_mode: str = "fresh"   # "fresh": new Phase I per replication; "shared": one Phase I
    n_jobs: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValidationError(f"replications must be >= 1, got {self.replications}")
        if self.onset < 1:
            raise ValidationError(f"onset must be >= 1, got {self.onset}")
        if self.sigma < 0:
            raise ValidationError(f"sigma must be >= 0, got {self.sigma}")
        if self.phase1_mode not in ("fresh", "shared"):
            raise ValidationError(f"phase1_mode must be 'fresh' or 'shared', got {self.phase1_mode!r}")
        make_wireframe(self.part)  # fail before any computation
        if self.defect is not None:
            self.defect_spec()

    def defect_spec(self) -> DefectSpec | None:
        if self.defect is None:
            return None
        return DefectSpec(**self.defect)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["chart"] = asdict(self.chart)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        chart = d.pop("chart", {})
        if isinstance(chart, dict):
            chart = ChartConfig(**{**chart, "dims": tuple(chart.get("dims", (0, 1)))})
        return cls(chart=chart, **d)


@dataclass(frozen=True)
class RunRecord:
    replication: int
    run_length: int
    censored: bool
    signal_dims: tuple[int, ...]


@dataclass(frozen=True)
class RunLengthSummary:
    arl: float
    sdrl: float
    n_replications: int
    n_censored: int
    signal_dim_counts: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class KSResult:
    """One-sample KS test against Uniform(0, 1)."""

    ks_statistic: float
    p_value: float
    n: int
    argmax_location: float


@dataclass(frozen=True)
class GeometricReference:
    """Exact and nominal geometric run-length references for a chart."""

    rate: float
    arl: float
    sdrl: float
    nominal_arl: float
    nominal_sdrl: float


def geometric_reference(alpha: float, m0: int) -> GeometricReference:
    """Run-length law implied by the discrete permutation p-values.

    The per-step signal rate is floor(alpha*(m0+1))/(m0+1); run lengths are
    geometric with that rate when steps are independent. The nominal values
    1/alpha and sqrt(1-alpha)/alpha are reported alongside.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    if m0 < 1:
        raise ValidationError(f"m0 must be >= 1, got {m0}")
    k = math.floor(alpha * (m0 + 1))
    if k == 0:
        raise ValidationError(
            f"alpha={alpha} is below the p-value floor 1/{m0 + 1}; "
            "no null value can fall at or under the limit, so the chart can never signal"
        )
    r = k / (m0 + 1)
    return GeometricReference(
        rate=r,
        arl=1.0 / r,
        sdrl=math.sqrt(1.0 - r) / r,
        nominal_arl=1.0 / alpha,
        nominal_sdrl=math.sqrt(1.0 - alpha) / alpha,
    )


def part_seed(base_seed: int, replication: int, part_index: int) -> int:
    """Stable 64-bit noise seed for one part of one replication."""
    ss = np.random.SeedSequence((int(base_seed), int(replication), int(part_index)))
    return int(ss.generate_state(1, np.uint64)[0])


def _noisy(base: PointCloud, sigma: float, seed: int) -> PointCloud:
    return add_noise(base, NoiseSpec(sigma, seed))


def _phase1_clouds(cfg: ExperimentConfig, base: PointCloud, replication: int):
    rep = replication if cfg.phase1_mode == "fresh" else 0
    return [
        _noisy(base, cfg.sigma, part_seed(cfg.base_seed, rep, i))
        for i in range(cfg.chart.m0)
    ]


def _one_replication(cfg: ExperimentConfig, rep: int, base_nominal: PointCloud,
                     base_defective: PointCloud | None, shared_refs=None) -> RunRecord:
    refs = shared_refs or build_phase1(_phase1_clouds(cfg, base_nominal, rep), cfg.chart)

    def stream():
        i = 1
        while True:
            base = base_defective if (base_defective is not None and i >= cfg.onset) else base_nominal
            yield _noisy(base, cfg.sigma, part_seed(cfg.base_seed, rep, cfg.chart.m0 + i - 1))
            i += 1

    rl, steps = monitor_stream(refs, stream(), cfg.chart)
    signal_dims: tuple[int, ...] = ()
    if not rl.censored:
        last = steps[-1]
        signal_dims = tuple(d for d in cfg.chart.dims if last.p_values[d] <= cfg.chart.alpha)
    return RunRecord(rep, rl.run_length, rl.censored, signal_dims)


def run_length_experiment(cfg: ExperimentConfig) -> tuple[RunLengthSummary, list[RunRecord]]:
    """Monte Carlo run-length study; writes result files when output_dir is set."""
    nominal_w = make_wireframe(cfg.part)
    spec = cfg.defect_spec()
    base_nominal = sample_cloud(nominal_w)
    base_defective = sample_cloud(apply_defect(nominal_w, spec)) if spec else None

    shared_refs = None
    if cfg.phase1_mode == "shared":
        shared_refs = build_phase1(_phase1_clouds(cfg, base_nominal, 0), cfg.chart)

    if cfg.n_jobs == 1:
        records = [
            _one_replication(cfg, r, base_nominal, base_defective, shared_refs)
            for r in range(cfg.replications)
        ]
    else:
        records = Parallel(n_jobs=cfg.n_jobs)(
            delayed(_one_replication)(cfg, r, base_nominal, base_defective, shared_refs)
            for r in range(cfg.replications)
        )
    records = sorted(records, key=lambda rec: rec.replication)
    summary = summarize_run_lengths(records, cfg.chart.dims)
    if cfg.output_dir:
        _write_results(cfg, summary, records)
    return summary, records


def summarize_run_lengths(records, dims) -> RunLengthSummary:
    lengths = np.array([r.run_length for r in records], dtype=np.float64)
    counts = {d: sum(1 for r in records if d in r.signal_dims) for d in dims}
    sdrl = float(lengths.std(ddof=1)) if lengths.size > 1 else 0.0
    return RunLengthSummary(
        arl=float(lengths.mean()),
        sdrl=sdrl,
        n_replications=len(records),
        n_censored=sum(1 for r in records if r.censored),
        signal_dim_counts=counts,
    )


def _write_results(cfg: ExperimentConfig, summary: RunLengthSummary, records) -> None:
    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(os.path.join(cfg.output_dir, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(cfg.output_dir, "run_lengths.csv"), "w", encoding="utf-8") as fh:
        fh.write("replication,run_length,censored,signal_dims\n")
        for r in records:
            dims_txt = ";".join(str(d) for d in r.signal_dims)
            fh.write(f"{r.replication},{r.run_length},{int(r.censored)},{dims_txt}\n")
    with open(os.path.join(cfg.output_dir, "summary.csv"), "w", encoding="utf-8") as fh:
        dim_cols = "".join(f",signals_dim{d}" for d in sorted(summary.signal_dim_counts))
        fh.write(f"arl,sdrl,n_replications,n_censored{dim_cols}\n")
        dim_vals = "".join(f",{summary.signal_dim_counts[d]}" for d in sorted(summary.signal_dim_counts))
        fh.write(
            f"{summary.arl!r},{summary.sdrl!r},{summary.n_replications},"
            f"{summary.n_censored}{dim_vals}\n"
        )


def ks_uniformity_test(pvalues) -> KSResult:
    """One-sample KS statistic against Uniform(0, 1), asymptotic p-value.

    The statistic is the sup gap between the sample ECDF and the identity;
    argmax_location records the sample value where the gap is attained.
    """
    arr = np.sort(np.asarray(pvalues, dtype=np.float64))
    n = arr.shape[0]
    if n == 0:
        raise ValidationError("need at least one p-value")
    if arr[0] < 0.0 or arr[-1] > 1.0:
        raise ValidationError("p-values must lie in [0, 1]")
    i = np.arange(1, n + 1)
    d_plus = i / n - arr
    d_minus = arr - (i - 1) / n
    if d_plus.max() >= d_minus.max():
        stat = float(d_plus.max())
        loc = float(arr[int(np.argmax(d_plus))])
    else:
        stat = float(d_minus.max())
        loc = float(arr[int(np.argmax(d_minus))])
    p = float(kstwobign.sf(math.sqrt(n) * stat))
    return KSResult(stat, min(max(p, 0.0), 1.0), n, loc)


def _power_study_one(cfg: ExperimentConfig, test_index: int, base_nominal: PointCloud,
                     base_test: PointCloud) -> dict[int, float]:
    clouds = [
        _noisy(base_nominal, cfg.sigma, part_seed(cfg.base_seed, test_index, i))
        for i in range(cfg.chart.m0)
    ]
    refs = build_phase1(clouds, cfg.chart)
    y = _noisy(base_test, cfg.sigma, part_seed(cfg.base_seed, test_index, cfg.chart.m0))
    diagram = compute_diagram(y, cfg.chart)
    return {
        dim: permutation_test(refs[dim], diagram, cfg.chart.alpha).p_value
        for dim in cfg.chart.dims
    }


def pvalue_power_study(cfg: ExperimentConfig, n_tests: int) -> dict[int, tuple[np.ndarray, KSResult]]:
    """Repeat (fresh reference + one test part) n_tests times; KS-test the p-values.

    The test part carries the configured defect when one is given, so the
    study measures detection power; without a defect it checks the null
    uniformity of the p-values. Returns per-dimension (p-values, KSResult).
    """
    if n_tests < 1:
        raise ValidationError(f"n_tests must be >= 1, got {n_tests}")
    nominal_w = make_wireframe(cfg.part)
    spec = cfg.defect_spec()
    base_nominal = sample_cloud(nominal_w)
    base_test = sample_cloud(apply_defect(nominal_w, spec)) if spec else base_nominal

    if cfg.n_jobs == 1:
        rows = [_power_study_one(cfg, t, base_nominal, base_test) for t in range(n_tests)]
    else:
        rows = Parallel(n_jobs=cfg.n_jobs)(
            delayed(_power_study_one)(cfg, t, base_nominal, base_test)
            for t in range(n_tests)
        )
    out: dict[int, tuple[np.ndarray, KSResult]] = {}
    for dim in cfg.chart.dims:
        pvals = np.array([row[dim] for row in rows])
        out[dim] = (pvals, ks_uniformity_test(pvals))
    return out
