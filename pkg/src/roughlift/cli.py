"""Command line surface: lift, verify, gen.

Exit codes: 0 success, 2 configuration or schema violations, 3 numerical
failures inside the pipeline.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .besov import PathError, read_path_csv, window_path, write_path_csv
from .regularize import SchemeError
from .roughpath import (LiftConfig, LiftError, RoughPath, chen_defect,
                        from_document, hoelder_slope, lift, shuffle_defect,
                        to_document)
from .synth import generate

CONFIG_KEYS = ("input", "alpha", "levels", "kmax", "grid_fine", "grid_coarse",
               "scheme", "window_margin", "coarse_step", "out", "report",
               "allow_integer_inv_alpha", "threads")


class ConfigError(ValueError):
    pass


def _merge_config(args: argparse.Namespace) -> dict:
    merged: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        unknown = set(file_cfg) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        merged.update(file_cfg)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _report_from(rp: RoughPath) -> dict:
    slopes = {}
    for n in range(1, rp.n_levels + 1):
        try:
            slope, resid = hoelder_slope(rp, n)
        except LiftError:
            slope, resid = float("nan"), float("nan")
        slopes[str(n)] = {"slope": slope, "fit_residual": resid}
    report = {
        "chen_defect": chen_defect(rp),
        "shuffle_defect": shuffle_defect(rp),
        "hoelder_slopes": slopes,
        "max_level_magnitude": rp.max_magnitude(),
    }
    for key in ("band_tail_energy", "imag_max", "top_shell_contribution",
                "lift_seconds"):
        if key in rp.meta:
            report[key] = rp.meta[key]
    return report


def _dump_json(doc: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def cmd_lift(args: argparse.Namespace) -> int:
    cfg_map = _merge_config(args)
    if "input" not in cfg_map:
        raise ConfigError("--input is required")
    if "alpha" not in cfg_map:
        raise ConfigError("--alpha is required")
    try:
        raw = read_path_csv(cfg_map["input"])
    except OSError as exc:
        raise ConfigError(f"cannot read input {cfg_map['input']}: {exc}")
    if cfg_map.get("grid_fine") is not None and raw.m != int(cfg_map["grid_fine"]):
        raise ConfigError(
            f"--grid-fine {cfg_map['grid_fine']} does not match the input's "
            f"{raw.m} samples")
    if raw.m & (raw.m - 1):
        raise ConfigError(f"input sample count {raw.m} is not a power of two")
    cfg = LiftConfig(
        alpha=float(cfg_map["alpha"]),
        levels=(int(cfg_map["levels"]) if cfg_map.get("levels") is not None else None),
        k_max=int(cfg_map.get("kmax", 10)),
        coarse_points=int(cfg_map.get("grid_coarse", 33)),
        scheme=str(cfg_map.get("scheme", "regularized")),
        window_margin=float(cfg_map.get("window_margin", 0.25)),
        coarse_step=(int(cfg_map["coarse_step"])
                     if cfg_map.get("coarse_step") is not None else None),
        allow_integer_inv_alpha=bool(cfg_map.get("allow_integer_inv_alpha", False)),
        threads=int(cfg_map.get("threads", 1)),
    )
    try:
        cfg.resolve_alpha()
        cfg.n_levels()
    except LiftError as exc:
        raise ConfigError(str(exc))
    windowed = window_path(raw, margin=cfg.window_margin)
    t0 = time.time()
    try:
        rp = lift(windowed, cfg)
        report = _report_from(rp)
    except (SchemeError, FloatingPointError) as exc:
        print(f"numerical failure in lift: {exc}", file=sys.stderr)
        return 3
    report["wall_seconds"] = time.time() - t0
    report["config"] = {k: cfg_map.get(k) for k in CONFIG_KEYS if k in cfg_map}
    out = cfg_map.get("out", "roughpath.json")
    rep = cfg_map.get("report", "report.json")
    _dump_json(to_document(rp), out)
    _dump_json(report, rep)
    print(f"wrote {out} and {rep}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        with open(args.roughpath) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {args.roughpath}: {exc}")
    try:
        rp = from_document(doc)
    except LiftError as exc:
        raise ConfigError(str(exc))
    report = _report_from(rp)
    if args.report:
        _dump_json(report, args.report)
    print(json.dumps(report, sort_keys=True, indent=1))
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    if not 0.0 < args.alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    if args.grid_fine < 4 or args.grid_fine & (args.grid_fine - 1):
        raise ConfigError("--grid-fine must be a power of two (>= 4)")
    try:
        path = generate(args.kind, args.grid_fine, args.channels, args.alpha,
                        args.seed)
    except PathError as exc:
        raise ConfigError(str(exc))
    write_path_csv(args.out, path)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roughlift",
        description="Construct and verify geometric rough paths over sampled "
                    "Hölder paths by frequency-ordered blockwise regularization.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_lift = sub.add_parser("lift", help="lift a CSV path and write rough path + report")
    p_lift.add_argument("--input", type=str)
    p_lift.add_argument("--config", type=str, help="JSON config; flags override")
    p_lift.add_argument("--alpha", type=float)
    p_lift.add_argument("--levels", type=int)
    p_lift.add_argument("--kmax", type=int)
    p_lift.add_argument("--grid-fine", dest="grid_fine", type=int)
    p_lift.add_argument("--grid-coarse", dest="grid_coarse", type=int)
    p_lift.add_argument("--scheme", choices=("regularized", "full"))
    p_lift.add_argument("--window-margin", dest="window_margin", type=float)
    p_lift.add_argument("--coarse-step", dest="coarse_step", type=int)
    p_lift.add_argument("--out", type=str)
    p_lift.add_argument("--report", type=str)
    p_lift.add_argument("--allow-integer-inv-alpha", dest="allow_integer_inv_alpha",
                        action="store_const", const=True, default=None)
    p_lift.add_argument("--threads", type=int)
    p_lift.set_defaults(func=cmd_lift)

    p_verify = sub.add_parser("verify", help="recompute residuals from a rough path JSON")
    p_verify.add_argument("roughpath", type=str)
    p_verify.add_argument("--report", type=str)
    p_verify.set_defaults(func=cmd_verify)

    p_gen = sub.add_parser("gen", help="write a synthetic test path CSV")
    p_gen.add_argument("--kind", choices=("weierstrass", "bandnoise", "smoothpoly"),
                       required=True)
    p_gen.add_argument("--alpha", type=float, default=0.3)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--grid-fine", dest="grid_fine", type=int, default=4096)
    p_gen.add_argument("--channels", type=int, default=2)
    p_gen.add_argument("--out", type=str, required=True)
    p_gen.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PathError, LiftError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
