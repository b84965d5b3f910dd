"""Command-line interface.

Subcommands: gen (emit part clouds), ph (cloud to diagram CSV), dist
(diagram distances), permtest (reference dir + one cloud), spc run
(chart trace over a cloud stream), simulate rl / simulate power
(config-driven studies). Exit code 0 on success, 2 on validation errors.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys

from .errors import ParseError, SimplexBudgetError, ValidationError
from .filtration import DEFAULT_SIMPLEX_BUDGET, build_rips
from .geometry import load_pointcloud, pairwise_distances, save_pointcloud
from .harness import (
    ExperimentConfig,
    geometric_reference,
    make_wireframe,
    part_seed,
    pvalue_power_study,
    run_length_experiment,
)
from .inference import build_reference, permutation_test
from .metrics import bottleneck_distance, duration_distance, wasserstein_distance
from .partgen import (
    DefectSpec,
    NoiseSpec,
    add_noise,
    apply_defect,
    sample_cloud,
    save_wireframe,
)
from .persistence import load_diagram, persistence, save_diagram
from .spc import ChartConfig, build_phase1, monitor_stream, write_chart_trace

_PART_PARAMS = {
    "cube": ("edge", "spacing"),
    "tube": ("edge", "layers", "spacing"),
    "lattice": ("nx", "ny", "nz", "cell_edge", "spacing"),
    "egg": ("rings", "struts_per_ring", "height", "radius", "spacing"),
}


def _parse_dims(text: str) -> tuple[int, ...]:
    table = {"0": (0,), "1": (1,), "both": (0, 1)}
    if text not in table:
        raise ValidationError(f"--dims must be 0, 1 or both, got {text!r}")
    return table[text]


def _cloud_files(directory: str) -> list[str]:
    files = sorted(
        f for f in glob.glob(os.path.join(directory, "*"))
        if f.lower().endswith((".xyz", ".csv"))
    )
    if not files:
        raise ValidationError(f"no .xyz/.csv cloud files found in {directory!r}")
    return files


def _chart_config_from_args(args, m0: int) -> ChartConfig:
    return ChartConfig(
        alpha=args.alpha,
        m0=m0,
        dims=_parse_dims(args.dims),
        distance=args.distance,
        max_steps=getattr(args, "max_steps", 1000),
        max_diameter=args.max_diameter,
    )


def _cmd_gen(args) -> int:
    recipe = {"kind": args.part}
    for name in _PART_PARAMS[args.part]:
        value = getattr(args, name)
        if value is not None:
            recipe[name] = value
    w = make_wireframe(recipe)
    if args.defect:
        w = apply_defect(w, DefectSpec(args.defect, args.severity, args.target, args.axis))
    if args.wireframe_json:
        save_wireframe(w, args.wireframe_json)
    base = sample_cloud(w)
    if args.count == 1 and args.out:
        cloud = add_noise(base, NoiseSpec(args.sigma, part_seed(args.seed, 0, 0)))
        save_pointcloud(cloud, args.out, args.format)
        print(f"wrote {len(cloud)} points to {args.out}")
        return 0
    out_dir = args.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    for i in range(args.count):
        cloud = add_noise(base, NoiseSpec(args.sigma, part_seed(args.seed, 0, i)))
        path = os.path.join(out_dir, f"part_{i:04d}.{args.format}")
        save_pointcloud(cloud, path, args.format)
    print(f"wrote {args.count} clouds of {len(base)} points to {out_dir}")
    return 0


def _cmd_ph(args) -> int:
    cloud = load_pointcloud(args.cloud)
    f = build_rips(pairwise_distances(cloud), args.max_dim, args.max_diameter, args.budget)
    diagram = persistence(f, cloud.label)
    save_diagram(diagram, args.out)
    print(f"{len(diagram)} features -> {args.out}")
    return 0


def _cmd_dist(args) -> int:
    X = load_diagram(args.diagram_x)
    Y = load_diagram(args.diagram_y)
    if args.distance == "duration":
        value = duration_distance(X, Y, args.dim)
    elif args.distance == "bottleneck":
        value = bottleneck_distance(X, Y, args.dim)
    else:
        value = wasserstein_distance(X, Y, args.p, args.dim, args.ground)
    print(repr(value))
    return 0


def _cmd_permtest(args) -> int:
    files = _cloud_files(args.refs)
    cfg = _chart_config_from_args(args, m0=len(files))
    refs = build_phase1([load_pointcloud(f) for f in files], cfg)
    y = load_pointcloud(args.cloud)
    from .spc import compute_diagram

    diagram = compute_diagram(y, cfg)
    rows = []
    for dim in cfg.dims:
        res = permutation_test(refs[dim], diagram, cfg.alpha)
        rows.append((dim, res))
        verdict = "reject" if res.reject() else "fail to reject"
        print(f"dim {dim}: p-value {res.p_value!r} ({verdict} at alpha={cfg.alpha})")
    if args.null_out:
        with open(args.null_out, "w", encoding="utf-8") as fh:
            fh.write("dim,null_stat\n")
            for dim, res in rows:
                for v in res.null_stats:
                    fh.write(f"{dim},{float(v)!r}\n")
        print(f"null distributions -> {args.null_out}")
    return 0


def _cmd_spc_run(args) -> int:
    ref_files = _cloud_files(args.refs)
    cfg = _chart_config_from_args(args, m0=len(ref_files))
    refs = build_phase1([load_pointcloud(f) for f in ref_files], cfg)
    stream = (load_pointcloud(f) for f in _cloud_files(args.stream))
    rl, steps = monitor_stream(refs, stream, cfg)
    write_chart_trace(steps, args.out)
    status = "censored" if rl.censored else "signal"
    print(f"run length {rl.run_length} ({status}); trace -> {args.out}")
    return 0


def _load_experiment(args) -> ExperimentConfig:
    with open(args.config, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    chart = payload.get("chart", {})
    if args.alpha is not None:
        chart["alpha"] = args.alpha
    if args.m0 is not None:
        chart["m0"] = args.m0
    if args.dims is not None:
        chart["dims"] = list(_parse_dims(args.dims))
    if args.distance is not None:
        chart["distance"] = args.distance
    payload["chart"] = chart
    if args.seed is not None:
        payload["base_seed"] = args.seed
    if args.replications is not None:
        payload["replications"] = args.replications
    if args.jobs is not None:
        payload["n_jobs"] = args.jobs
    if args.out is not None:
        payload["output_dir"] = args.out
    return ExperimentConfig.from_dict(payload)


def _cmd_simulate_rl(args) -> int:
    cfg = _load_experiment(args)
    summary, _ = run_length_experiment(cfg)
    ref = geometric_reference(cfg.chart.alpha, cfg.chart.m0)
    print(
        f"ARL {summary.arl:.3f}  SDRL {summary.sdrl:.3f}  "
        f"(n={summary.n_replications}, censored={summary.n_censored})"
    )
    print(
        f"geometric reference: exact ARL {ref.arl:.3f} SDRL {ref.sdrl:.3f} "
        f"(rate {ref.rate:.5f}); nominal ARL {ref.nominal_arl:.3f} SDRL {ref.nominal_sdrl:.3f}"
    )
    if cfg.output_dir:
        print(f"results -> {cfg.output_dir}")
    return 0


def _cmd_simulate_power(args) -> int:
    cfg = _load_experiment(args)
    results = pvalue_power_study(cfg, args.tests)
    out_dir = cfg.output_dir
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "pvalues.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("dim,p_value\n")
            for dim in sorted(results):
                for p in results[dim][0]:
                    fh.write(f"{dim},{float(p)!r}\n")
        print(f"p-values -> {path}")
    for dim in sorted(results):
        ks = results[dim][1]
        print(
            f"dim {dim}: KS statistic {ks.ks_statistic:.5f}, p-value {ks.p_value:.5g} "
            f"(n={ks.n}, gap at {ks.argmax_location:.4f})"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topospc",
        description="Topological statistical process control for lattice parts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate sampled part clouds")
    p_gen.add_argument("--part", required=True, choices=sorted(_PART_PARAMS))
    p_gen.add_argument("--edge", type=float)
    p_gen.add_argument("--layers", type=int)
    p_gen.add_argument("--nx", type=int)
    p_gen.add_argument("--ny", type=int)
    p_gen.add_argument("--nz", type=int)
    p_gen.add_argument("--cell-edge", dest="cell_edge", type=float)
    p_gen.add_argument("--rings", type=int)
    p_gen.add_argument("--struts-per-ring", dest="struts_per_ring", type=int)
    p_gen.add_argument("--height", type=float)
    p_gen.add_argument("--radius", type=float)
    p_gen.add_argument("--spacing", type=float)
    p_gen.add_argument("--defect", choices=["shift_layer", "collapse_edge", "collapse_scale", "missing_strut"])
    p_gen.add_argument("--severity", type=float, default=0.0)
    p_gen.add_argument("--target", type=int)
    p_gen.add_argument("--axis", default="y", choices=["x", "y", "z"])
    p_gen.add_argument("--sigma", type=float, default=0.0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--count", type=int, default=1)
    p_gen.add_argument("--format", default="xyz", choices=["xyz", "csv"])
    p_gen.add_argument("--out")
    p_gen.add_argument("--out-dir", dest="out_dir")
    p_gen.add_argument("--wireframe-json", dest="wireframe_json")
    p_gen.set_defaults(fn=_cmd_gen)

    p_ph = sub.add_parser("ph", help="compute a persistence diagram CSV from a cloud")
    p_ph.add_argument("cloud")
    p_ph.add_argument("--out", required=True)
    p_ph.add_argument("--max-dim", dest="max_dim", type=int, default=2)
    p_ph.add_argument("--max-diameter", dest="max_diameter", type=float)
    p_ph.add_argument("--budget", type=int, default=DEFAULT_SIMPLEX_BUDGET)
    p_ph.set_defaults(fn=_cmd_ph)

    p_dist = sub.add_parser("dist", help="distance between two diagram CSVs")
    p_dist.add_argument("diagram_x")
    p_dist.add_argument("diagram_y")
    p_dist.add_argument("--dim", type=int, default=0)
    p_dist.add_argument("--distance", default="duration",
                        choices=["duration", "bottleneck", "wasserstein"])
    p_dist.add_argument("--p", type=float, default=2.0)
    p_dist.add_argument("--ground", default="linf", choices=["linf", "lp"])
    p_dist.set_defaults(fn=_cmd_dist)

    p_perm = sub.add_parser("permtest", help="permutation-test one cloud against a reference dir")
    p_perm.add_argument("cloud")
    p_perm.add_argument("--refs", required=True)
    p_perm.add_argument("--alpha", type=float, default=0.05)
    p_perm.add_argument("--dims", default="both")
    p_perm.add_argument("--distance", default="duration",
                        choices=["duration", "bottleneck", "wasserstein"])
    p_perm.add_argument("--max-diameter", dest="max_diameter", type=float)
    p_perm.add_argument("--null-out", dest="null_out")
    p_perm.set_defaults(fn=_cmd_permtest)

    p_spc = sub.add_parser("spc", help="control charting")
    spc_sub = p_spc.add_subparsers(dest="spc_command", required=True)
    p_run = spc_sub.add_parser("run", help="monitor a stream of cloud files")
    p_run.add_argument("--refs", required=True)
    p_run.add_argument("--stream", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--alpha", type=float, default=0.05)
    p_run.add_argument("--dims", default="both")
    p_run.add_argument("--distance", default="duration",
                       choices=["duration", "bottleneck", "wasserstein"])
    p_run.add_argument("--max-steps", dest="max_steps", type=int, default=1000)
    p_run.add_argument("--max-diameter", dest="max_diameter", type=float)
    p_run.set_defaults(fn=_cmd_spc_run)

    p_sim = sub.add_parser("simulate", help="config-driven simulation studies")
    sim_sub = p_sim.add_subparsers(dest="sim_command", required=True)
    for name, fn in (("rl", _cmd_simulate_rl), ("power", _cmd_simulate_power)):
        p = sim_sub.add_parser(name, help=f"{name} study")
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--m0", type=int)
        p.add_argument("--dims")
        p.add_argument("--distance", choices=["duration", "bottleneck", "wasserstein"])
        p.add_argument("--replications", type=int)
        p.add_argument("--jobs", type=int)
        p.add_argument("--out")
        if name == "power":
            p.add_argument("--tests", type=int, required=True)
        p.set_defaults(fn=fn)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValidationError, ParseError, SimplexBudgetError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
