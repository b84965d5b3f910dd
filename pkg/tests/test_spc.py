import numpy as np
import pytest

from topospc.errors import ValidationError
from topospc.harness import part_seed
from topospc.partgen import DefectSpec, NoiseSpec, add_noise, apply_defect, gen_cube, sample_cloud
from topospc.spc import (
    ChartConfig,
    ChartStep,
    RunLengthSample,
    build_phase1,
    chart_step,
    monitor_stream,
    write_chart_trace,
)

BASE = sample_cloud(gen_cube(1.0, 0.25))


def noisy(seed, base=BASE, sigma=0.01):
    return add_noise(base, NoiseSpec(sigma, part_seed(123, 0, seed)))


@pytest.fixture(scope="module")
def refs_and_cfg():
    cfg = ChartConfig(alpha=0.05, m0=30, dims=(0, 1), max_steps=10)
    refs = build_phase1([noisy(i) for i in range(30)], cfg)
    return refs, cfg


def test_config_validation():
    with pytest.raises(ValidationError):
        ChartConfig(alpha=0.0)
    with pytest.raises(ValidationError):
        ChartConfig(alpha=1.0)
    with pytest.raises(ValidationError):
        ChartConfig(m0=1)
    with pytest.raises(ValidationError):
        ChartConfig(dims=(2,))
    with pytest.raises(ValidationError):
        ChartConfig(max_steps=0)
    with pytest.raises(ValidationError):
        ChartConfig(distance="euclid")
    assert ChartConfig(dims=(1, 0)).dims == (0, 1)
    assert ChartConfig(dims=(1,)).max_dimension == 2


def test_noise_free_clone_never_signals():
    cfg = ChartConfig(alpha=0.05, m0=5, dims=(0, 1))
    clone = BASE
    refs = build_phase1([clone] * 5, cfg)
    step = chart_step(refs, clone, cfg)
    assert step.p_values[0] == 1.0 and step.p_values[1] == 1.0
    assert not step.signal


def test_signal_is_or_rule(refs_and_cfg):
    refs, cfg = refs_and_cfg
    step = chart_step(refs, noisy(999), cfg)
    assert step.signal == any(step.p_values[d] <= cfg.alpha for d in cfg.dims)
    assert set(step.p_values) == {0, 1}
    assert set(step.alpha_limits) == {0, 1}


def test_gross_defect_signals_in_dim1(refs_and_cfg):
    refs, cfg = refs_and_cfg
    broken = apply_defect(gen_cube(1.0, 0.25), DefectSpec("collapse_edge", 0.4, target=7))
    y = add_noise(sample_cloud(broken), NoiseSpec(0.01, part_seed(5, 0, 0)))
    step = chart_step(refs, y, cfg)
    assert step.p_values[1] == pytest.approx(1 / 31, abs=1e-12)
    assert step.signal


def test_observed_stat_fixed_limit_adapts(refs_and_cfg):
    refs, cfg = refs_and_cfg
    stream = (noisy(1000 + i) for i in range(10))
    rl, steps = monitor_stream(refs, stream, cfg)
    assert len(steps) == rl.run_length
    for dim in cfg.dims:
        observed = {s.observed_stats[dim] for s in steps}
        assert len(observed) == 1  # the statistic never moves
    if len(steps) > 1:
        limits = [s.alpha_limits[1] for s in steps]
        assert len(set(limits)) > 1  # the limit does


def test_monitor_stream_censors_at_max_steps(refs_and_cfg):
    refs, _ = refs_and_cfg
    cfg = ChartConfig(alpha=0.01, m0=30, dims=(0,), max_steps=3)
    rl, steps = monitor_stream(refs, (noisy(2000 + i) for i in range(50)), cfg)
    if rl.censored:
        assert rl.run_length == 3 and len(steps) == 3
    else:
        assert rl.run_length <= 3


def test_monitor_stream_dry_source(refs_and_cfg):
    refs, _ = refs_and_cfg
    cfg = ChartConfig(alpha=0.001, m0=30, dims=(0,), max_steps=100)
    # alpha below the p floor: no signal possible, source dries up first
    rl, steps = monitor_stream(refs, [noisy(3000 + i) for i in range(4)], cfg)
    assert rl.censored and rl.run_length == 4
    with pytest.raises(ValidationError):
        monitor_stream(refs, [], cfg)


def test_max_steps_one_boundary(refs_and_cfg):
    refs, _ = refs_and_cfg
    cfg = ChartConfig(alpha=0.05, m0=30, dims=(0,), max_steps=1)
    rl, steps = monitor_stream(refs, (noisy(4000 + i) for i in range(5)), cfg)
    assert rl.run_length == 1
    assert len(steps) == 1


def test_build_phase1_count_mismatch():
    cfg = ChartConfig(m0=10, dims=(0,))
    with pytest.raises(ValidationError):
        build_phase1([noisy(i) for i in range(5)], cfg)


def test_run_length_sample_validation():
    with pytest.raises(ValidationError):
        RunLengthSample(0, False)


def test_chart_trace_csv(tmp_path, refs_and_cfg):
    refs, cfg = refs_and_cfg
    rl, steps = monitor_stream(refs, (noisy(5000 + i) for i in range(10)), cfg)
    path = tmp_path / "trace.csv"
    write_chart_trace(steps, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "part_index,dim,observed_stat,alpha_limit,p_value,signal"
    assert len(lines) == 1 + len(steps) * len(cfg.dims)
    first = lines[1].split(",")
    assert first[0] == "1" and first[1] == "0"
    assert first[5] in ("0", "1")
