"""Batch front-end: subcommands that run the library and emit CSV/JSON.

Every run writes its artifacts atomically into the output directory plus
a ``manifest.json`` recording the effective config digest, the seed, and
library versions, so identical invocations reproduce identical bytes.
Worker count and output location are execution details and stay out of
the manifest.

Exit codes: 0 success, 2 usage, 3 invalid config or input data,
4 internal table inconsistency.
"""

import argparse
import dataclasses
import hashlib
import json
import math
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__, clifford, rb, sites, su2
from .config import ConfigError, default_config, load_config
from .noise import analytic_budget

TWO_PI = 2.0 * math.pi

USAGE_ERROR = 2
VALIDATION_ERROR = 3
INTEGRITY_ERROR = 4


class IntegrityError(RuntimeError):
    """A built-in table failed self-verification."""


def _lengths_arg(text):
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("lengths must be positive integers")
    return values


def _common_flags(sub):
    sub.add_argument("--config", metavar="PATH", help="JSON config file")
    sub.add_argument("--seed", type=int, help="master seed (overrides config)")
    sub.add_argument("--out", metavar="DIR", help="output directory")
    sub.add_argument("--format", choices=("csv", "json"), dest="fmt",
                     help="artifact format where both are supported")
    sub.add_argument("--workers", type=int, default=1,
                     help="worker threads for Monte Carlo fan-out")


def _config_from_args(args, extra=None):
    overrides = dict(extra or {})
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if args.fmt is not None:
        overrides["format"] = args.fmt
    return load_config(args.config, overrides)


def _write_atomic(path, data):
    # Same-directory temp file, then rename: readers never see half a file.
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _json_bytes(obj):
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


def _emit(cfg, command, artifacts):
    """Write artifacts + manifest into the output directory."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digests = {}
    for name, data in artifacts.items():
        _write_atomic(out / name, data)
        digests[name] = hashlib.sha256(data).hexdigest()
    manifest = {
        "command": command,
        "config_digest": cfg.digest(),
        "seed": cfg.seed,
        "format": cfg.format,
        "versions": {
            "rbsim": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "artifacts": digests,
    }
    _write_atomic(out / "manifest.json", _json_bytes(manifest))
    for name in artifacts:
        print(out / name)
    return out


def _csv_bytes(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(x) for x in row))
    return ("\n".join(lines) + "\n").encode()


def _cell(x):
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def _table_artifact(cfg, stem, header, rows):
    if cfg.format == "json":
        payload = {"columns": list(header),
                   "rows": [list(map(_plain, r)) for r in rows]}
        return {f"{stem}.json": _json_bytes(payload)}
    return {f"{stem}.csv": _csv_bytes(header, rows)}


def _plain(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


# ---------------------------------------------------------------- commands


def cmd_clifford_verify(args):
    cfg = _config_from_args(args)
    report = clifford.verify_group()
    area = report.average_area_halfpi
    print(f"closure {report.closure_checked - len(report.closure_failures)}"
          f"/{report.closure_checked}, "
          f"pulse-products {24 - len(report.pulse_failures)}/24, "
          f"axis-products {24 - len(report.axis_failures)}/24, "
          f"avg area {area.numerator}pi/{area.denominator * 2}")
    if not report.passed:
        raise IntegrityError("group table failed verification")
    doc = clifford.group_to_json()
    _emit(cfg, "clifford verify", {"group.json": _json_bytes(doc)})
    return 0


def cmd_rb_run(args):
    extra = {"rb": {}}
    if args.shots is not None:
        extra["rb"]["shots"] = args.shots
    if args.sequences is not None:
        extra["rb"]["n_sequences"] = args.sequences
    if args.lengths is not None:
        extra["rb"]["lengths"] = args.lengths
    cfg = _config_from_args(args, extra)
    ds = rb.run_rb(
        cfg.noise_params(),
        cfg.rb_lengths,
        cfg.rb_sequences,
        cfg.rb_shots,
        seed=cfg.seed,
        workers=args.workers,
        shared_prefix=cfg.shared_prefix,
    )
    if cfg.format == "json":
        artifacts = {"rb_dataset.json": _json_bytes(ds.to_json_dict())}
    else:
        artifacts = {
            "rb_dataset.csv": _csv_bytes(
                ("seq_id", "length", "shots", "survivors"), ds.rows
            )
        }
    _emit(cfg, "rb run", artifacts)
    return 0


def _load_dataset(path):
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"dataset not found: {path}")
    if p.suffix == ".json":
        doc = json.loads(p.read_text())
        rows = tuple(
            (int(r["seq_id"]), int(r["length"]), int(r["shots"]),
             int(r["survivors"]))
            for r in doc["rows"]
        )
        ds = rb.RBDataset(rows=rows, seed=doc["metadata"].get("seed", 0),
                          params_digest=doc["metadata"].get("params_digest", ""))
    else:
        ds = rb.RBDataset.from_csv(p)
    if not ds.rows:
        raise ConfigError("dataset has no rows")
    for seq_id, length, shots, _ in ds.rows:
        if length < 1 or shots < 1:
            raise ConfigError(
                f"dataset row (seq {seq_id}, length {length}) is inconsistent"
            )
    return ds


def cmd_rb_fit(args):
    cfg = _config_from_args(args)
    ds = _load_dataset(args.dataset)
    fit = rb.fit_decay(ds, sign=args.sign)
    _emit(cfg, "rb fit", {"decay_fit.json": _json_bytes(fit.to_json_dict())})
    flag = " (boundary)" if fit.boundary_flag else ""
    print(f"d_if {fit.d_if:.6g}  d {fit.d:.6g}  F2 {fit.f_squared:.6f}{flag}")
    return 0


def cmd_rabi_scan(args):
    cfg = _config_from_args(args)
    omega = (TWO_PI * 1e3 * args.rabi_khz if args.rabi_khz is not None
             else cfg.noise_params().omega)
    if args.t_max_us is not None:
        t_max = args.t_max_us * 1e-6
    else:
        t_max = 3.0 * math.pi / omega  # three half-turns of the resonant drive
    if args.steps < 2:
        raise ConfigError(f"steps must be >= 2, got {args.steps}")
    if t_max <= 0.0:
        raise ConfigError(f"t-max-us must be positive, got {args.t_max_us}")
    rows = []
    for i in range(args.steps):
        t = t_max * i / (args.steps - 1)
        p = su2.transfer_probability(omega * t, args.ratio)
        rows.append((t * 1e6, p))
    artifacts = _table_artifact(cfg, "rabi", ("t_us", "p_transfer"), rows)
    _emit(cfg, "rabi scan", artifacts)
    return 0


def cmd_crosstalk_scan(args):
    cfg = _config_from_args(args)
    if args.r_max <= args.r_min:
        raise ConfigError("r-max must exceed r-min")
    rows = sites.detuning_scan(
        sites.default_scan_gates(), r_range=(args.r_min, args.r_max),
        steps=args.steps,
    )
    artifacts = _table_artifact(
        cfg, "crosstalk_scan", ("r", "gate", "E_xt", "spinflip"), rows
    )
    _emit(cfg, "crosstalk scan", artifacts)
    return 0


def cmd_select_run(args):
    extra = {"select": {}}
    if args.shots is not None:
        extra["select"]["shots"] = args.shots
    if args.sequences is not None:
        extra["select"]["n_sequences"] = args.sequences
    if args.lengths is not None:
        extra["select"]["lengths"] = args.lengths
    if args.target is not None:
        extra["select"]["target"] = args.target
    cfg = _config_from_args(args, extra)
    result = sites.site_selected_rb(
        cfg.geometry(),
        cfg.beam(),
        cfg.drive(),
        cfg.noise_params(),
        cfg.select_lengths,
        cfg.select_sequences,
        cfg.select_shots,
        seed=cfg.seed,
        target=cfg.select_target,
        workers=args.workers,
    )
    header = ("site", "row", "col", "role", "r_ratio", "d_if", "d",
              "F2_or_Ext", "stderr")
    rows = [
        (s.site, s.row, s.col, s.role, s.r_ratio, s.fit.d_if, s.fit.d,
         s.figure, s.figure_stderr)
        for s in result.sites
    ]
    artifacts = _table_artifact(cfg, "sites", header, rows)
    artifacts["summary.json"] = _json_bytes(result.summary())
    _emit(cfg, "select run", artifacts)
    s = result.summary()
    print(f"target F2 {s['f2_target']:.6f}  "
          f"E_xt nn {s['mean_ext_nn']:.3e}  far {s['mean_ext_far']:.3e}")
    return 0


def cmd_array_load(args):
    extra = {"loading": {}}
    if args.p_fill is not None:
        extra["loading"]["p_fill"] = args.p_fill
    if args.runs is not None:
        extra["loading"]["runs"] = args.runs
    cfg = _config_from_args(args, extra)
    result = sites.load_array(
        cfg.geometry(), cfg.p_fill, cfg.loading_runs,
        rb.stream(cfg.seed, sites.STREAM_LOAD),
    )
    rows = [(k, int(v)) for k, v in enumerate(result.histogram)]
    artifacts = _table_artifact(
        cfg, "loading_histogram", ("occupied_count", "frequency"), rows
    )
    _emit(cfg, "array load", artifacts)
    print(f"mean occupied {result.mean_occupied:.2f} of "
          f"{cfg.geometry().n_sites}")
    return 0


def cmd_budget(args):
    cfg = _config_from_args(args)
    params = cfg.noise_params()
    if args.rabi_khz is not None:
        params = dataclasses.replace(params, omega=TWO_PI * 1e3 * args.rabi_khz)
    if args.t2star_ms is not None:
        params = dataclasses.replace(params, t2_star=1e-3 * args.t2star_ms)
    budget = analytic_budget(params, mean_area=math.pi * args.avg_area_pi)
    doc = {
        "rabi_hz": params.omega / TWO_PI,
        "t2_star_s": params.t2_star,
        "mean_pulse_area_pi": args.avg_area_pi,
        "mean_gate_time_us": budget.mean_gate_time * 1e6,
        "alpha": budget.alpha,
        "F2": budget.f_squared,
    }
    _emit(cfg, "budget", {"budget.json": _json_bytes(doc)})
    print(f"mean gate time {doc['mean_gate_time_us']:.2f} us  "
          f"alpha {budget.alpha:.6f}  F2 {budget.f_squared:.6f}")
    return 0


def cmd_show_defaults(args):
    print(json.dumps(default_config(), indent=2, sort_keys=True))
    return 0


# ------------------------------------------------------------------ parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rbsim",
        description="Randomized-benchmarking simulator for a site-addressed "
                    "microwave-driven atom array.",
    )
    top = parser.add_subparsers(dest="command", metavar="COMMAND")

    cl = top.add_parser("clifford", help="group-table tools")
    cl_sub = cl.add_subparsers(dest="action", metavar="ACTION")
    p = cl_sub.add_parser("verify", help="verify closure and pulse products")
    _common_flags(p)
    p.set_defaults(func=cmd_clifford_verify)

    rbp = top.add_parser("rb", help="randomized benchmarking")
    rb_sub = rbp.add_subparsers(dest="action", metavar="ACTION")
    p = rb_sub.add_parser("run", help="simulate a benchmarking dataset")
    _common_flags(p)
    p.add_argument("--shots", type=int)
    p.add_argument("--sequences", type=int)
    p.add_argument("--lengths", type=_lengths_arg, metavar="a,b,c")
    p.set_defaults(func=cmd_rb_run)
    p = rb_sub.add_parser("fit", help="fit a decay curve to a dataset")
    _common_flags(p)
    p.add_argument("dataset", help="CSV or JSON dataset path")
    p.add_argument("--sign", type=int, choices=(1, -1), default=1,
                   help="+1 survival decay, -1 crosstalk rise")
    p.set_defaults(func=cmd_rb_fit)

    ra = top.add_parser("rabi", help="driven two-level dynamics")
    ra_sub = ra.add_subparsers(dest="action", metavar="ACTION")
    p = ra_sub.add_parser("scan", help="transfer probability versus time")
    _common_flags(p)
    p.add_argument("--ratio", type=float, default=0.0,
                   help="detuning ratio delta/Omega (default 0)")
    p.add_argument("--rabi-khz", type=float, default=None,
                   help="Rabi frequency in kHz (default: config noise.rabi_hz)")
    p.add_argument("--t-max-us", type=float, default=None,
                   help="scan end time in us (default: a 3pi rotation)")
    p.add_argument("--steps", type=int, default=301)
    p.set_defaults(func=cmd_rabi_scan)

    xt = top.add_parser("crosstalk", help="spectator-error tools")
    xt_sub = xt.add_subparsers(dest="action", metavar="ACTION")
    p = xt_sub.add_parser("scan", help="crosstalk error versus detuning ratio")
    _common_flags(p)
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=8.0)
    p.add_argument("--steps", type=int, default=801)
    p.set_defaults(func=cmd_crosstalk_scan)

    se = top.add_parser("select", help="site-selected benchmarking")
    se_sub = se.add_subparsers(dest="action", metavar="ACTION")
    p = se_sub.add_parser("run", help="benchmark one addressed site")
    _common_flags(p)
    p.add_argument("--shots", type=int)
    p.add_argument("--sequences", type=int)
    p.add_argument("--lengths", type=_lengths_arg, metavar="a,b,c")
    p.add_argument("--target", type=int, metavar="SITE")
    p.set_defaults(func=cmd_select_run)

    ar = top.add_parser("array", help="loading statistics")
    ar_sub = ar.add_subparsers(dest="action", metavar="ACTION")
    p = ar_sub.add_parser("load", help="stochastic loading histogram")
    _common_flags(p)
    p.add_argument("--p-fill", type=float)
    p.add_argument("--runs", type=int)
    p.set_defaults(func=cmd_array_load)

    p = top.add_parser("budget", help="analytic coherence-limited F2")
    _common_flags(p)
    p.add_argument("--rabi-khz", type=float, default=None)
    p.add_argument("--t2star-ms", type=float, default=None)
    p.add_argument("--avg-area-pi", type=float, default=1.75,
                   help="mean pulse area per gate in units of pi")
    p.set_defaults(func=cmd_budget)

    co = top.add_parser("config", help="configuration tools")
    co_sub = co.add_subparsers(dest="action", metavar="ACTION")
    p = co_sub.add_parser("show-defaults", help="print the default document")
    p.set_defaults(func=cmd_show_defaults)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else USAGE_ERROR
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VALIDATION_ERROR
    except IntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INTEGRITY_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VALIDATION_ERROR


if __name__ == "__main__":
    sys.exit(main())
