"""Command line front end.

Subcommands:
  analyze    closed-form probabilities for one operating point
  roc        analytical ROC sweep written as CSV or JSON
  simulate   Monte Carlo sweep with the analytical columns alongside
  optimal-n  adaptive vote-threshold selection for a target miss probability

A flat key = value config file may supply any field; command line flags win
over the file. All dB to linear conversions happen here, at the ingestion
boundary. Exit codes: 0 success, 2 configuration error, 3 output I/O error,
4 infeasible miss-detection target.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from .fusion import FusionConfig
from .local_sensing import SensingParams, local_pd, local_pf, threshold_for_pf
from .mathx import Probability, db_to_linear
from .montecarlo import SimScenario, run_grid
from .reporting import ReportChannel, channel_from_snr_db, perfect_channel
from .roc import InfeasibleTargetError, analytic_roc, optimal_n

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INFEASIBLE = 4

ROC_COLUMNS = ["n", "lambda", "pf_local", "pm_local", "pe", "qf", "qm", "qf_floor", "qm_floor"]
SIM_COLUMNS = ROC_COLUMNS + ["qf_hat", "qm_hat", "qf_stderr", "qm_stderr", "trials_h0", "trials_h1"]

_CONFIG_KEYS = {
    "k", "n", "samples_m", "snr_db", "report_snr_db", "perfect_report",
    "lambda", "lambda_grid", "pf_grid", "target_qm", "trials", "seed",
    "workers", "out", "format",
}


class ConfigError(ValueError):
    """Invalid or missing run configuration; the message names the field."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopsense",
        description="Cooperative spectrum sensing analysis and simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grids=False):
        p.add_argument("--config", help="flat key = value config file; flags win over it")
        p.add_argument("--k", type=int, help="number of cooperating radios K")
        p.add_argument("--n", type=int, action="append",
                       help="vote threshold n (repeatable where a rule sweep makes sense)")
        p.add_argument("--samples-m", type=int, help="energy detector samples per sensing event M")
        p.add_argument("--snr-db", type=float, help="average sensing SNR in dB")
        p.add_argument("--report-snr-db", type=float, help="reporting channel SNR in dB")
        p.add_argument("--perfect-report", action="store_const", const=True, default=None,
                       help="error-free reporting channel (bit error probability exactly 0)")
        p.add_argument("--out", help="output file path (stdout when omitted)")
        p.add_argument("--format", choices=("csv", "json"), help="output format, default csv")
        if grids:
            p.add_argument("--lambda", dest="lambda_value", type=float,
                           help="single detection threshold")
            p.add_argument("--lambda-grid", help="linear threshold grid lo:hi:count")
            p.add_argument("--pf-grid", help="log-spaced local false alarm grid lo:hi:count")

    p = sub.add_parser("analyze", help="closed-form probabilities at one operating point")
    common(p)
    p.add_argument("--lambda", dest="lambda_value", type=float, help="detection threshold")

    p = sub.add_parser("roc", help="analytical ROC sweep to a file")
    common(p, grids=True)

    p = sub.add_parser("simulate", help="Monte Carlo sweep to a file")
    common(p, grids=True)
    p.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    p.add_argument("--seed", type=int, help="simulation seed (64-bit unsigned)")
    p.add_argument("--workers", type=int, help="worker threads; the output does not depend on it")

    p = sub.add_parser("optimal-n", help="adaptive vote threshold for a target miss probability")
    common(p)
    p.add_argument("--target-qm", type=float, help="target fused miss-detection probability")
    return parser


# ---------------------------------------------------------------------------
# configuration assembly

_PARSERS = {
    "k": int,
    "n": lambda s: [int(v) for v in s.split(",")],
    "samples_m": int,
    "snr_db": float,
    "report_snr_db": float,
    "perfect_report": lambda s: {"true": True, "false": False}[s.lower()],
    "lambda": float,
    "lambda_grid": str,
    "pf_grid": str,
    "target_qm": float,
    "trials": int,
    "seed": int,
    "workers": int,
    "out": str,
    "format": str,
}


def _read_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"config: cannot read {path!r}: {err}") from err
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config: line {lineno} is not 'key = value': {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"config: unknown key {key!r} on line {lineno}")
        try:
            values[key] = _PARSERS[key](value.strip())
        except (ValueError, KeyError) as err:
            raise ConfigError(f"{key}: cannot parse {value.strip()!r}") from err
    return values


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = _read_config_file(args.config) if getattr(args, "config", None) else {}
    flag_names = {
        "k": "k", "n": "n", "samples_m": "samples_m", "snr_db": "snr_db",
        "report_snr_db": "report_snr_db", "perfect_report": "perfect_report",
        "lambda": "lambda_value", "lambda_grid": "lambda_grid", "pf_grid": "pf_grid",
        "target_qm": "target_qm", "trials": "trials", "seed": "seed",
        "workers": "workers", "out": "out", "format": "format",
    }
    for key, attr in flag_names.items():
        value = getattr(args, attr, None)
        if value is not None:
            cfg[key] = value
    cfg.setdefault("format", "csv")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format: must be 'csv' or 'json', got {cfg['format']!r}")
    return cfg


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"{key}: required but not given")
    return cfg[key]


def _fusion_k(cfg: dict) -> int:
    k = _require(cfg, "k")
    if not isinstance(k, int) or k < 1:
        raise ConfigError(f"k: must be a positive integer, got {k!r}")
    return k


def _vote_list(cfg: dict, k: int) -> list[int]:
    ns = _require(cfg, "n")
    if isinstance(ns, int):
        ns = [ns]
    for n in ns:
        if not isinstance(n, int) or not 1 <= n <= k:
            raise ConfigError(f"n: each vote threshold must satisfy 1 <= n <= k, got {n!r}")
    return sorted(set(ns))


def _sensing_template(cfg: dict) -> SensingParams:
    m = _require(cfg, "samples_m")
    if not isinstance(m, int) or m < 1:
        raise ConfigError(f"samples_m: must be a positive integer, got {m!r}")
    snr_db = _require(cfg, "snr_db")
    try:
        return SensingParams(samples_m=m, threshold_lambda=0.0,
                             avg_snr_gamma=db_to_linear(float(snr_db)))
    except ValueError as err:
        raise ConfigError(f"snr_db: {err}") from err


def _channel(cfg: dict) -> ReportChannel:
    perfect = cfg.get("perfect_report")
    snr = cfg.get("report_snr_db")
    if perfect and snr is not None:
        raise ConfigError("report_snr_db: give either report_snr_db or perfect_report, not both")
    if perfect:
        return perfect_channel()
    if snr is None:
        raise ConfigError("report_snr_db: required unless perfect_report is set")
    try:
        return channel_from_snr_db(float(snr))
    except ValueError as err:
        raise ConfigError(f"report_snr_db: {err}") from err


def _parse_grid(text: str, field: str):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"{field}: expected lo:hi:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as err:
        raise ConfigError(f"{field}: expected lo:hi:count, got {text!r}") from err
    if count < 1:
        raise ConfigError(f"{field}: count must be >= 1, got {count}")
    if count == 1 and lo != hi:
        raise ConfigError(f"{field}: a 1-point grid needs lo == hi, got {text!r}")
    if count > 1 and not lo < hi:
        raise ConfigError(f"{field}: need lo < hi, got {text!r}")
    return lo, hi, count


def _lambda_values(cfg: dict, samples_m: int) -> list[float]:
    given = [key for key in ("lambda", "lambda_grid", "pf_grid") if key in cfg]
    if len(given) != 1:
        raise ConfigError("lambda: give exactly one of lambda, lambda_grid, pf_grid, "
                          f"got {given or 'none'}")
    if "lambda" in cfg:
        lam = float(cfg["lambda"])
        if not math.isfinite(lam) or lam < 0:
            raise ConfigError(f"lambda: must be finite and >= 0, got {lam!r}")
        return [lam]
    if "lambda_grid" in cfg:
        lo, hi, count = _parse_grid(cfg["lambda_grid"], "lambda_grid")
        if lo < 0:
            raise ConfigError(f"lambda_grid: thresholds must be >= 0, got lo={lo}")
        return [float(v) for v in np.linspace(lo, hi, count)]
    lo, hi, count = _parse_grid(cfg["pf_grid"], "pf_grid")
    if not (0.0 < lo < 1.0 and 0.0 < hi < 1.0):
        raise ConfigError(f"pf_grid: probabilities must lie strictly inside (0, 1), got {cfg['pf_grid']!r}")
    pf_values = [float(v) for v in np.geomspace(lo, hi, count)]
    return sorted(threshold_for_pf(q, samples_m) for q in pf_values)


# ---------------------------------------------------------------------------
# output

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".12g")


def _emit(rows: list[dict], columns: list[str], out: Optional[str], fmt: str) -> None:
    if fmt == "csv":
        text_parts = []
        text_parts.append(",".join(columns))
        for row in rows:
            text_parts.append(",".join(_fmt(row[c]) for c in columns))
        text = "\n".join(text_parts) + "\n"
    else:
        clean = [{c: _json_value(row[c]) for c in columns} for row in rows]
        text = json.dumps(clean, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json_value(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, float):
        return float(format(value, ".17g"))
    return value


def _analytic_rows(k: int, ns: list[int], sensing: SensingParams, channel: ReportChannel,
                   lambdas: list[float]) -> list[dict]:
    pe = channel.pe
    rows = []
    for n in ns:
        rule = FusionConfig(num_radios_k=k, vote_threshold_n=n)
        curve = analytic_roc(rule, sensing, channel, lambdas)
        for lam, qf, qm in curve.points:
            p = replace(sensing, threshold_lambda=lam)
            pf = local_pf(p)
            pm = Probability(1.0 - local_pd(p))
            rows.append({
                "n": n, "lambda": lam, "pf_local": float(pf), "pm_local": float(pm),
                "pe": float(pe), "qf": float(qf), "qm": float(qm),
                "qf_floor": float(curve.qf_floor), "qm_floor": float(curve.qm_floor),
            })
    return rows


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(cfg: dict) -> int:
    k = _fusion_k(cfg)
    ns = _vote_list(cfg, k)
    if len(ns) != 1:
        raise ConfigError(f"n: analyze takes exactly one vote threshold, got {ns}")
    sensing = _sensing_template(cfg)
    channel = _channel(cfg)
    if "lambda" not in cfg:
        raise ConfigError("lambda: required for analyze")
    lam = float(cfg["lambda"])
    if not math.isfinite(lam) or lam < 0:
        raise ConfigError(f"lambda: must be finite and >= 0, got {lam!r}")
    rows = _analytic_rows(k, ns, sensing, channel, [lam])
    row = rows[0]
    for key in ("pf_local", "pm_local", "pe", "qf", "qm", "qf_floor", "qm_floor"):
        print(f"{key} = {_fmt(row[key])}")
    if cfg.get("out") is not None:
        _emit(rows, ROC_COLUMNS, cfg["out"], cfg["format"])
    return EXIT_OK


def cmd_roc(cfg: dict) -> int:
    k = _fusion_k(cfg)
    ns = _vote_list(cfg, k)
    sensing = _sensing_template(cfg)
    channel = _channel(cfg)
    lambdas = _lambda_values(cfg, sensing.samples_m)
    rows = _analytic_rows(k, ns, sensing, channel, lambdas)
    _emit(rows, ROC_COLUMNS, cfg.get("out"), cfg["format"])
    return EXIT_OK


def cmd_simulate(cfg: dict) -> int:
    k = _fusion_k(cfg)
    ns = _vote_list(cfg, k)
    sensing = _sensing_template(cfg)
    channel = _channel(cfg)
    lambdas = _lambda_values(cfg, sensing.samples_m)
    trials = _require(cfg, "trials")
    seed = _require(cfg, "seed")
    workers = cfg.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError(f"workers: must be a positive integer, got {workers!r}")
    try:
        scenario = SimScenario(
            sensing=replace(sensing, threshold_lambda=lambdas[0]),
            channel=channel,
            fusion=FusionConfig(num_radios_k=k, vote_threshold_n=ns[0]),
            trials=trials,
            seed=seed,
        )
    except ValueError as err:
        field = "trials" if "trials" in str(err) else "seed"
        raise ConfigError(f"{field}: {err}") from err
    grid = run_grid(scenario, lambdas, ns, workers=workers)
    base_rows = _analytic_rows(k, ns, sensing, channel, lambdas)
    rows = []
    index = 0
    for ni in range(len(ns)):
        for li in range(len(lambdas)):
            row = dict(base_rows[index])
            index += 1
            sim = grid[li][ni]
            row.update({
                "qf_hat": float(sim.qf_hat), "qm_hat": float(sim.qm_hat),
                "qf_stderr": sim.qf_stderr, "qm_stderr": sim.qm_stderr,
                "trials_h0": sim.trials_h0, "trials_h1": sim.trials_h1,
            })
            rows.append(row)
    _emit(rows, SIM_COLUMNS, cfg.get("out"), cfg["format"])
    return EXIT_OK


def cmd_optimal_n(cfg: dict) -> int:
    k = _fusion_k(cfg)
    sensing = _sensing_template(cfg)
    channel = _channel(cfg)
    target = _require(cfg, "target_qm")
    try:
        target = float(target)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"target_qm: {err}") from err
    if not (math.isfinite(target) and 0.0 < target < 1.0):
        raise ConfigError(f"target_qm: must lie strictly inside (0, 1), got {target!r}")
    result = optimal_n(target, k, sensing, channel)
    lines = [
        ("target_qm", result.target_qm),
        ("chosen_n", result.n),
        ("interval_n", result.interval_n),
        ("direct_n", result.direct_n),
        ("agree", result.agree),
        ("table_monotone", result.table.is_monotone),
    ]
    for n in sorted(result.table.entries):
        lines.append((f"qm_star[{n}]", result.table.entries[n]))
    lines += [
        ("achieved_lambda", result.achieved_lambda),
        ("achieved_qf", float(result.achieved_qf)),
        ("achieved_qm", float(result.achieved_qm)),
    ]
    for key, value in lines:
        print(f"{key} = {_fmt(value)}")
    if cfg.get("out") is not None:
        payload = {key: _json_value(value) for key, value in lines}
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            if cfg["format"] == "json":
                fh.write(json.dumps(payload, indent=2) + "\n")
            else:
                fh.write("key,value\n")
                for key, value in lines:
                    fh.write(f"{key},{_fmt(value)}\n")
    return EXIT_OK


_HANDLERS = {
    "analyze": cmd_analyze,
    "roc": cmd_roc,
    "simulate": cmd_simulate,
    "optimal-n": cmd_optimal_n,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        return _HANDLERS[args.command](cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleTargetError as err:
        print(f"infeasible target: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
