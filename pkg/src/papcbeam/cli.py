"""Command-line front end: experiment runs, single-trial inspection, export.

``papcbeam simulate`` runs the Monte-Carlo comparison and writes the CDF
CSVs plus JSON summary/manifest; ``papcbeam single`` solves one trial and
prints per-method diagnostics.  Exit codes: 0 success, 1 configuration
error, 2 runtime failure.
"""

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import asdict, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ScenarioConfig, generate_channel, generate_scenario, trial_stream
from .channel import STREAM_CHANNEL, STREAM_SCENARIO
from .constraints import multicarrier_margins
from .experiment import monte_carlo, run_trial
from .multicarrier import (
    MultiCarrierLink,
    cyclic_multicarrier,
    precoder_objective,
    whitened_eigenpairs,
)
from .single_carrier import gauss_seidel_mmse

__all__ = ["ConfigError", "parse_config", "cmd_simulate", "cmd_single", "main"]


class ConfigError(ValueError):
    """Invalid configuration file or overrides (exit code 1)."""


_INT_FIELDS = {"n", "m", "K", "trials", "cyclic_iters", "dual_iters", "seed"}
_FLOAT_FIELDS = {
    "bandwidth_hz", "fc_hz", "delay_spread_s", "p_min_w", "p_max_w",
    "noise_floor_dbw", "noise_spread_db",
}
_CONFIG_FIELDS = {f.name for f in fields(ScenarioConfig)}


def _build_config(data: dict) -> ScenarioConfig:
    unknown = sorted(set(data) - _CONFIG_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    clean = {}
    for key, value in data.items():
        if key in _INT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"config key {key!r} must be an integer")
            clean[key] = value
        elif key in _FLOAT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"config key {key!r} must be a number")
            clean[key] = float(value)
        elif key == "methods":
            if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
                raise ConfigError("config key 'methods' must be a list of method names")
            clean[key] = tuple(value)
        else:  # pragma: no cover - field sets above track ScenarioConfig
            raise ConfigError(f"unhandled config key {key!r}")
    try:
        return ScenarioConfig(**clean)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(path: str) -> ScenarioConfig:
    """Load a JSON config; missing keys take the built-in defaults, unknown
    keys are rejected by name."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return _build_config(data)


def _apply_overrides(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    data = asdict(cfg)
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        data["trials"] = args.trials
    if getattr(args, "methods", None) is not None:
        data["methods"] = tuple(tag.strip() for tag in args.methods.split(",") if tag.strip())
    return _build_config(data)


def _load_config(args: argparse.Namespace) -> ScenarioConfig:
    cfg = parse_config(args.config) if args.config else ScenarioConfig()
    return _apply_overrides(cfg, args)


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_cdf_csv(path: Path, header: str, cdfs: dict, method_order) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", header, "cdf"])
        for tag in method_order:
            series = cdfs[tag]
            for value, prob in zip(series.values, series.probs):
                writer.writerow([tag, _fmt(value), _fmt(prob)])


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    result = monte_carlo(cfg, threads=args.threads)
    elapsed = time.perf_counter() - t0
    finished = datetime.now(timezone.utc).isoformat()

    files = {
        "snr_cdf.csv": lambda p: _write_cdf_csv(p, "snr_db", result.snr_cdfs, cfg.methods),
        "violations_count_cdf.csv": lambda p: _write_cdf_csv(
            p, "violation_count", result.violation_count_cdfs, cfg.methods
        ),
        "violations_maxpct_cdf.csv": lambda p: _write_cdf_csv(
            p, "max_percent_violation", result.violation_maxpct_cdfs, cfg.methods
        ),
        "summary.json": lambda p: _write_json(p, result.summary()),
    }
    for name, write in files.items():
        write(out_dir / name)

    manifest = {
        "artifact": "papcbeam",
        "version": __version__,
        "seed": cfg.seed,
        "config": {**asdict(cfg), "methods": list(cfg.methods)},
        "started_at": started,
        "finished_at": finished,
        "wall_seconds": elapsed,
        "method_seconds": result.method_seconds,
        "files": {name: _sha256(out_dir / name) for name in files},
    }
    _write_json(out_dir / "manifest.json", manifest)

    print(f"wrote {len(files) + 1} files to {out_dir}")
    for tag, stats in result.summary()["methods"].items():
        print(f"  {tag:12s} median SNR {stats['median_snr_db']:8.3f} dB   "
              f"median sum-MSE {stats['median_sum_mse']:.6g}")
    for name, value in result.summary()["median_snr_gaps_db"].items():
        print(f"  {name}: {value:+.3f} dB")
    return 0


def cmd_single(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    trial = args.trial

    pc, noise = generate_scenario(cfg, trial_stream(cfg.seed, trial, STREAM_SCENARIO))
    H = generate_channel(cfg, trial_stream(cfg.seed, trial, STREAM_CHANNEL))
    link = MultiCarrierLink(H, noise, pc)

    print(f"scenario: n={cfg.n} m={cfg.m} K={cfg.K} seed={cfg.seed} trial={trial}")
    print(f"budgets p (W): {np.array2string(pc.p, precision=4)}")

    result = run_trial(cfg, trial)
    for tag in cfg.methods:
        mr = result.methods[tag]
        print(
            f"{tag:12s} sum_mse={_fmt(mr.sum_mse)} "
            f"median_snr_db={np.median(mr.snr_db):.4f} "
            f"violations={mr.violation_count} max_violation_pct={mr.violation_max_percent:.3f}"
        )

    if "cyclic" in cfg.methods:
        eigens = whitened_eigenpairs(link)
        sol = cyclic_multicarrier(link, cfg.cyclic_iters, cfg.dual_iters, eigens=eigens)
        print("cyclic sum-MSE trace: " + " ".join(_fmt(v) for v in sol.trace))
        state = sol.dual_state
        rel_gap = sol.dual_gap / max(abs(precoder_objective(sol.Z, state.G)), np.finfo(float).tiny)
        print(
            f"dual: gap={_fmt(sol.dual_gap)} rel_gap={_fmt(rel_gap)} "
            f"iterations={state.iterations} converged={state.converged}"
        )
        print(
            f"kkt: stationarity={_fmt(state.stationarity_residual())} "
            f"min_margin={_fmt(multicarrier_margins(sol.Z, pc).min())} "
            f"max_lambda={_fmt(state.lam.max())}"
        )

    if cfg.K == 1 and "percarrier" in cfg.methods:
        pair = gauss_seidel_mmse(link.carrier(0))
        print("gauss-seidel trace: " + " ".join(_fmt(v) for v in pair.trace))

    if args.carrier_dump:
        tags = list(cfg.methods)
        print("carrier " + " ".join(f"{tag}_snr_db" for tag in tags))
        for k in range(cfg.K):
            row = " ".join(f"{result.methods[tag].snr_db[k]:.6f}" for tag in tags)
            print(f"{k:7d} {row}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="papcbeam",
        description="MMSE beamforming under per-antenna power constraints",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the Monte-Carlo comparison and export CDFs")
    sim.add_argument("--config", help="JSON config file (defaults used when omitted)")
    sim.add_argument("--out", default="results", help="output directory")
    sim.add_argument("--seed", type=int, help="override the config seed")
    sim.add_argument("--trials", type=int, help="override the trial count")
    sim.add_argument("--methods", help="comma-separated method subset")
    sim.add_argument("--threads", type=int, default=1, help="trial-level worker processes")
    sim.set_defaults(func=cmd_simulate)

    single = sub.add_parser("single", help="solve one trial and print diagnostics")
    single.add_argument("--config", help="JSON config file")
    single.add_argument("--trial", type=int, default=0, help="trial index")
    single.add_argument("--seed", type=int, help="override the config seed")
    single.add_argument("--methods", help="comma-separated method subset")
    single.add_argument("--carrier-dump", action="store_true", help="print the per-carrier SNR table")
    single.set_defaults(func=cmd_single)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
