"""Command-line entry point: simulate, synth, criteria, verify, fit-constants.

Configs are JSON files (see README for the schemas); every emitted report
embeds the tool version and a hash of the effective configuration. Runs
are deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, constants, criteria, initial, models, synth, verify
from .diagnostics import SeriesRecorder
from .grid import Grid
from .models import FlowState, Model, StepperConfig
from .series import DiagnosticSeries

DEFAULT_SIMULATE_CONFIG = {
    "model": "euler2d",
    "grid_n": 64,
    "nu": 0.0,
    "initial": {
        "preset": "random_smooth",
        "seed": 0,
        "slope": 3.0,
        "k_cutoff": None,
        "amplitude": 1.0,
    },
    "k": 3,
    "p": 2.0,
    "t_end": 1.0,
    "dt": None,
    "cfl_safety": 0.5,
    "dt_max": None,
    "record_every": 1,
    "out_stem": "run",
}

DEFAULT_SYNTH_CONFIG = {
    "kind": "self_similar",
    "model": "euler2d",
    "k": 3,
    "p": 2.0,
    "N": 2,
    "t_star": 1.0,
    "amplitude": 1.0,
    "deficit_scale": 1.0,
    "exponent": 0.5,
    "sign": 1,
    "eps0": 2.0,
    "modulation_depth": 0.5,
    "initial_norm": 1.0,
    "num_samples": 1024,
    "out_stem": "synthetic",
}

OSGOOD_FUNCTIONS = {
    "square": lambda s: s**2,
    "linear": lambda s: s,
    "s_log_sq": lambda s: s * np.log(s + math.e) ** 2,
    "one": lambda s: np.ones_like(np.asarray(s, dtype=float)),
}

DEFAULT_CRITERIA = ("lower_bound", "deficit_integral", "log_refined", "trichotomy")


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _merge_defaults(defaults: dict, cfg: dict) -> dict:
    merged = json.loads(json.dumps(defaults))
    for key, value in cfg.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key].update(value)
        else:
            merged[key] = value
    return merged


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(problems))
        self.problems = problems


def _validate_simulate(cfg: dict, out_dir: Path) -> list[str]:
    problems = []
    if cfg["model"] not in [m.value for m in Model]:
        problems.append(f"unknown model {cfg['model']!r}")
    n = cfg["grid_n"]
    if not (isinstance(n, int) and n >= 8 and (n & (n - 1)) == 0):
        problems.append(f"grid_n must be a power of two >= 8, got {n!r}")
    if cfg["nu"] < 0:
        problems.append("nu must be >= 0")
    if cfg["nu"] != 0 and cfg["model"] != "ns2d":
        problems.append(f"nonzero nu invalid for model {cfg['model']!r}")
    ic = cfg["initial"]
    if "file" not in ic and ic.get("preset") not in (
        "taylor_green",
        "random_smooth",
        "sqg_single_mode",
    ):
        problems.append(f"unknown initial preset {ic.get('preset')!r}")
    if cfg["t_end"] <= 0:
        problems.append("t_end must be positive")
    if cfg["record_every"] < 1:
        problems.append("record_every must be >= 1")
    if cfg["p"] < 2:
        problems.append("p must be >= 2")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / f".writable.{cfg['out_stem']}"
        probe.touch()
        probe.unlink()
    except OSError as exc:
        problems.append(f"output directory {out_dir} not writable: {exc}")
    # theory ranges are warnings, not failures
    if cfg["model"] in ("euler2d", "ns2d") and cfg["k"] <= 2:
        print(f"warning: k={cfg['k']} is at or below N/2+1=2", file=sys.stderr)
    if cfg["model"] == "sqg" and cfg["k"] <= 2 / cfg["p"] + 1:
        print(f"warning: k={cfg['k']} is at or below 2/p+1", file=sys.stderr)
    return problems


def _build_initial(cfg: dict, grid: Grid):
    ic = cfg["initial"]
    if "file" in ic:
        field = initial.read_field(ic["file"])
        if field.grid != grid:
            raise ConfigError(
                [f"grid in {ic['file']} is {field.grid}, config wants {grid}"]
            )
        return field
    preset = ic["preset"]
    if preset == "taylor_green":
        return initial.taylor_green_vorticity(grid, ic.get("amplitude", 1.0))
    if preset == "sqg_single_mode":
        return initial.sqg_single_mode(grid, ic.get("amplitude", 1.0))
    return initial.random_smooth(
        grid,
        seed=ic.get("seed", 0),
        slope=ic.get("slope", 3.0),
        k_cutoff=ic.get("k_cutoff"),
        amplitude=ic.get("amplitude", 1.0),
    )


def cmd_simulate(args) -> int:
    cfg = _merge_defaults(DEFAULT_SIMULATE_CONFIG, _load_json(args.config))
    if args.seed is not None:
        cfg["initial"]["seed"] = args.seed
    out_dir = Path(args.out)
    problems = _validate_simulate(cfg, out_dir)
    if problems:
        raise ConfigError(problems)

    grid = Grid(2, cfg["grid_n"])
    field = _build_initial(cfg, grid)
    if float(np.max(np.abs(field.values))) == 0.0:
        raise ConfigError(["initial field must be nonzero"])
    state = FlowState(Model(cfg["model"]), field, nu=cfg["nu"])
    meta = {
        "config_hash": config_hash(cfg),
        "tool_version": __version__,
        "seed": cfg["initial"].get("seed"),
        "threads": args.threads,
    }
    if args.constants:
        meta["fitted_constants"] = _load_json(args.constants).get("constants", {})
    recorder = SeriesRecorder(k=cfg["k"], p=cfg["p"], meta=meta)
    stepper = StepperConfig(
        t_end=cfg["t_end"],
        dt=cfg["dt"],
        cfl_safety=cfg["cfl_safety"],
        dt_max=cfg["dt_max"],
        record_every=cfg["record_every"],
    )
    series = models.run(state, stepper, recorder)
    csv_path, json_path = series.write(out_dir / cfg["out_stem"])
    print(f"wrote {csv_path} and {json_path} ({len(series)} samples)")
    if series.meta.get("blowup_suspected"):
        print(f"blow-up suspected: state lost finiteness at t={series.meta['abort_time']}")
    return 0


def cmd_synth(args) -> int:
    cfg = _merge_defaults(DEFAULT_SYNTH_CONFIG, _load_json(args.config))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = cfg.pop("out_stem")
    profile = synth.SyntheticProfile(**cfg)
    series = synth.synth(profile)
    series.meta["config_hash"] = config_hash(cfg)
    series.meta["tool_version"] = __version__
    csv_path, json_path = series.write(out_dir / stem)
    print(f"wrote {csv_path} and {json_path} ({len(series)} samples)")
    return 0


def _parse_t_star(text: str) -> list[float]:
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError(["--t-star needs at least one value"])
    return values


def cmd_criteria(args) -> int:
    series = DiagnosticSeries.read(args.series)
    t_stars = _parse_t_star(args.t_star)
    ids = [c.strip() for c in args.criteria.split(",") if c.strip()]
    unknown = [c for c in ids if c not in criteria.CRITERION_IDS]
    if unknown:
        raise ConfigError(
            [f"unknown criterion {c!r}; available: {', '.join(criteria.CRITERION_IDS)}" for c in unknown]
        )
    threshold = args.threshold
    if threshold is None and args.constants:
        fitted = _load_json(args.constants).get("constants", {})
        threshold = fitted.get("lower_bound_k")
    g = OSGOOD_FUNCTIONS[args.g]
    verdicts = []
    for t_star in t_stars:
        for cid in ids:
            if cid == "lower_bound":
                v = criteria.eval_lower_bound(series, t_star, threshold=threshold)
            elif cid == "deficit_integral":
                v = criteria.eval_integral_condition(series, t_star)
            elif cid == "log_refined":
                v = criteria.eval_log_corrected(series, t_star, args.eps0)
            elif cid == "log_refined_sup":
                v = criteria.eval_log_corrected(series, t_star, args.eps0, variant="sup")
            elif cid == "log_refined_sup_scaled":
                v = criteria.eval_log_corrected(series, t_star, args.eps0, variant="sup_scaled")
            elif cid == "trichotomy":
                v = criteria.classify_trichotomy(series, t_star, tol=args.tol)
            else:
                value = criteria.osgood_weighted_integral(series, t_star, g)
                v = criteria.CriterionVerdict(
                    "osgood_weighted",
                    t_star,
                    criteria.OUTCOME_SATISFIED,
                    {"integral": value, "g": args.g},
                    (0, len(series)),
                    {"model": series.model},
                )
            verdicts.append(v)
    effective = {
        "series": str(args.series),
        "criteria": ids,
        "t_star": t_stars,
        "eps0": args.eps0,
        "tol": args.tol,
        "threshold": threshold,
        "g": args.g,
    }
    report = {
        "tool_version": __version__,
        "config_hash": config_hash(effective),
        "series_meta": {
            "model": series.model,
            "params": {"k": series.params.k, "p": series.params.p, "N": series.params.N},
            "config_hash": series.meta.get("config_hash"),
        },
        "verdicts": [v.to_dict() for v in verdicts],
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.report:
        Path(args.report).write_text(text + "\n")
        print(f"wrote {args.report}")
    else:
        print(text)
    for v in verdicts:
        print(f"{v.criterion:<24} t*={v.t_star:<8g} {v.outcome}")
    return 0


def cmd_verify(args) -> int:
    try:
        results = verify.run_suite(args.suite)
    except KeyError:
        print(
            f"unknown suite {args.suite!r}; available: "
            + ", ".join(sorted(verify.SUITES) + ["all"]),
            file=sys.stderr,
        )
        return 2
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        tol = "" if math.isinf(r.tolerance) else f" tol={r.tolerance:g}"
        note = f"  ({r.note})" if r.note else ""
        print(f"{status} {r.name:<{width}} measured={r.measured:.3e}{tol}{note}")
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    if args.report:
        payload = {
            "tool_version": __version__,
            "suite": args.suite,
            "config_hash": config_hash({"suite": args.suite}),
            "results": [r.to_dict() for r in results],
        }
        Path(args.report).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_fit_constants(args) -> int:
    fc = constants.fit_constants(
        model=args.model,
        k=args.k,
        p=args.p,
        grid_n=args.n,
        family_size=args.family_size,
        seed=args.seed if args.seed is not None else 0,
    )
    payload = {"tool_version": __version__, "constants": fc.to_dict()}
    payload["config_hash"] = config_hash(payload["constants"])
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.report:
        Path(args.report).write_text(text + "\n")
        print(f"wrote {args.report}")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusflow",
        description="pseudo-spectral torus flows and blow-up diagnostics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a model and record diagnostics")
    sim.add_argument("--config", required=False, help="JSON run configuration")
    sim.add_argument("--out", default=".", help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override initial seed")
    sim.add_argument("--constants", default=None, help="fit-constants report to embed in the sidecar")
    sim.add_argument("--threads", type=int, default=1, help="recorded only; kernels are deterministic")
    sim.add_argument("--print-defaults", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    syn = sub.add_parser("synth", help="generate a synthetic diagnostics series")
    syn.add_argument("--config", required=False, help="JSON profile configuration")
    syn.add_argument("--out", default=".", help="output directory")
    syn.add_argument("--print-defaults", action="store_true")
    syn.set_defaults(func=cmd_synth)

    cri = sub.add_parser("criteria", help="evaluate blow-up criteria on a series")
    cri.add_argument("--series", required=True, help="series stem or .csv path")
    cri.add_argument("--t-star", dest="t_star", required=True, help="comma-separated candidate times")
    cri.add_argument("--criteria", default=",".join(DEFAULT_CRITERIA))
    cri.add_argument("--eps0", type=float, default=2.0)
    cri.add_argument("--tol", type=float, default=1e-3)
    cri.add_argument("--threshold", type=float, default=None, help="lower-bound constant")
    cri.add_argument("--constants", default=None, help="fit-constants report supplying the threshold")
    cri.add_argument("--g", choices=sorted(OSGOOD_FUNCTIONS), default="square")
    cri.add_argument("--report", default=None, help="write the JSON report here")
    cri.set_defaults(func=cmd_criteria)

    ver = sub.add_parser("verify", help="run a built-in verification suite")
    ver.add_argument("--suite", default="identities")
    ver.add_argument("--report", default=None)
    ver.set_defaults(func=cmd_verify)

    fit = sub.add_parser("fit-constants", help="fit inequality constants")
    fit.add_argument("--model", default="euler2d", choices=["euler2d", "ns2d", "sqg"])
    fit.add_argument("--k", type=int, default=3)
    fit.add_argument("--p", type=float, default=2.0)
    fit.add_argument("--n", type=int, default=64)
    fit.add_argument("--family-size", type=int, default=40)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--report", default=None)
    fit.set_defaults(func=cmd_fit_constants)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "print_defaults", False):
        defaults = DEFAULT_SIMULATE_CONFIG if args.command == "simulate" else DEFAULT_SYNTH_CONFIG
        print(json.dumps(defaults, indent=2, sort_keys=True))
        return 0
    if args.command in ("simulate", "synth") and not args.config:
        parser.error(f"{args.command} requires --config (or --print-defaults)")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
