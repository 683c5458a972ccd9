"""Experiment runner: config parsing, multi-trial execution, JSON/CSV output."""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from antsim.antnet import AntNetParams, AntNetRouting
from antsim.baselines import (
    BfRouting,
    DaemonRouting,
    OspfRouting,
    PQRouting,
    QRouting,
    SpfRouting,
)
from antsim.engine import Simulator
from antsim.metrics import MetricsCollector, power
from antsim.network import Network
from antsim.topology import builtin_topology, load_topology_file, topology_stats
from antsim.traffic import TrafficSource, TrafficSpec

ALGORITHMS = ("antnet", "ospf", "spf", "bf", "qr", "pqr", "daemon")


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending key."""


@dataclass
class ExperimentConfig:
    topology: str
    algorithm: str
    traffic: dict = field(default_factory=dict)
    run_length_s: float = 1000.0
    warmup_s: float = 500.0
    trials: int = 10
    master_seed: int = 0
    algorithm_params: dict = field(default_factory=dict)
    out_dir: str = "results"
    label: Optional[str] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm: unknown value {self.algorithm!r}")
        if self.warmup_s < 0:
            raise ConfigError("warmup_s: must be >= 0")
        if self.run_length_s <= 0:
            raise ConfigError("run_length_s: must be > 0")
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        if self.label is None:
            self.label = self.algorithm
        try:
            self.traffic_spec = TrafficSpec(**self.traffic)
        except TypeError as exc:
            raise ConfigError(f"traffic: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"traffic: {exc}") from exc


def load_config(path: str, **overrides) -> ExperimentConfig:
    with open(path) as fh:
        raw = json.load(fh)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    allowed = set(ExperimentConfig.__dataclass_fields__)
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"{key}: unknown configuration key")
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def resolve_topology(name: str):
    if os.path.exists(name):
        return load_topology_file(name)
    return builtin_topology(name)


def build_algorithm(name: str, params: dict):
    params = dict(params)
    if name == "antnet":
        return AntNetRouting(AntNetParams(**params))
    cls = {
        "ospf": OspfRouting,
        "spf": SpfRouting,
        "bf": BfRouting,
        "qr": QRouting,
        "pqr": PQRouting,
        "daemon": DaemonRouting,
    }[name]
    return cls(**params)


def run_trial(cfg: ExperimentConfig, trial: int) -> Tuple[dict, List[dict]]:
    """One self-contained simulation: routing-only warmup, then measured run."""
    seed = cfg.master_seed + trial
    sim = Simulator(master_seed=seed)
    topo = resolve_topology(cfg.topology)
    metrics = MetricsCollector(t_start=cfg.warmup_s)
    net = Network(sim, topo, metrics)
    algo = build_algorithm(cfg.algorithm, cfg.algorithm_params)
    net.set_algorithm(algo)
    t_end = cfg.warmup_s + cfg.run_length_s
    TrafficSource(net, cfg.traffic_spec, cfg.warmup_s, t_end).start()
    sim.run_until(cfg.warmup_s)
    algo.on_warmup_end(sim.now)
    sim.run_until(t_end)
    summary = metrics.summarize(t_end, net.total_bw_bps)
    summary["trial"] = trial
    summary["seed"] = seed
    summary["algorithm"] = cfg.algorithm
    summary["topology"] = cfg.topology
    return summary, metrics.windowed_series(t_end)


def _mean(xs: List[Optional[float]]) -> Optional[float]:
    vals = [x for x in xs if x is not None]
    if not vals:
        return None
    return math.fsum(vals) / len(vals)


def aggregate_summaries(summaries: List[dict]) -> dict:
    throughput = _mean([s["throughput_bps"] for s in summaries])
    p90 = _mean([s["delay_p90_s"] for s in summaries])
    return {
        "algorithm": summaries[0]["algorithm"],
        "topology": summaries[0]["topology"],
        "trials": len(summaries),
        "throughput_bps": throughput,
        "delay_mean_s": _mean([s["delay_mean_s"] for s in summaries]),
        "delay_p50_s": _mean([s["delay_p50_s"] for s in summaries]),
        "delay_p90_s": p90,
        "overhead": _mean([s["overhead"] for s in summaries]),
        "power": power(throughput, p90),
    }


def _dump_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _dump_series_csv(path: str, series: List[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["time_s", "throughput_bps", "mean_delay_s", "offered_bps"]
        )
        writer.writeheader()
        writer.writerows(series)


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> dict:
    """Run all trials; optionally write per-trial and aggregate result files."""
    out = os.path.join(cfg.out_dir, cfg.label)
    if write:
        os.makedirs(out, exist_ok=True)
    summaries = []
    for trial in range(cfg.trials):
        summary, series = run_trial(cfg, trial)
        summaries.append(summary)
        if write:
            _dump_json(os.path.join(out, f"trial_{trial}.json"), summary)
            _dump_series_csv(os.path.join(out, f"trial_{trial}_series.csv"), series)
    agg = aggregate_summaries(summaries)
    if write:
        _dump_json(os.path.join(out, "aggregate.json"), agg)
    return agg


def sweep_ant_rate(cfg: ExperimentConfig, rates: List[float], write: bool = True) -> List[dict]:
    """Power-vs-overhead table over ant launch intervals (antnet only)."""
    if cfg.algorithm != "antnet":
        raise ConfigError("algorithm: sweep-rate requires antnet")
    rows = []
    for rate in rates:
        sub = copy.deepcopy(cfg)
        sub.algorithm_params = dict(sub.algorithm_params, launch_interval_s=rate)
        sub.label = f"rate_{rate:g}"
        agg = run_experiment(sub, write=write)
        rows.append(
            {"launch_interval_s": rate, "overhead": agg["overhead"], "power": agg["power"]}
        )
    peak = max((r["power"] for r in rows if r["power"] is not None), default=None)
    for r in rows:
        r["normalized_power"] = (
            r["power"] / peak if peak and r["power"] is not None else None
        )
    if write:
        _dump_json(os.path.join(cfg.out_dir, "rate_sweep.json"), rows)
    return rows


def sweep_load(cfg: ExperimentConfig, msia_list: List[float], write: bool = True) -> List[dict]:
    """One aggregate per session inter-arrival load point."""
    rows = []
    for msia in msia_list:
        sub = copy.deepcopy(cfg)
        sub.traffic = dict(sub.traffic, msia_s=msia)
        sub.traffic_spec = TrafficSpec(**sub.traffic)
        sub.label = f"{cfg.label}_msia_{msia:g}"
        agg = run_experiment(sub, write=write)
        agg["msia_s"] = msia
        rows.append(agg)
    if write:
        _dump_json(os.path.join(cfg.out_dir, f"{cfg.label}_load_sweep.json"), rows)
    return rows


# -- command line -----------------------------------------------------------


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="antsim", description="Adaptive network routing simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a multi-trial experiment from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--trials", type=int, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--algorithm", default=None)

    p_rate = sub.add_parser("sweep-rate", help="sweep the ant launch interval")
    p_rate.add_argument("config")
    p_rate.add_argument("--rates", type=float, nargs="+", required=True)
    p_rate.add_argument("--out", default=None)
    p_rate.add_argument("--trials", type=int, default=None)
    p_rate.add_argument("--seed", type=int, default=None)

    p_load = sub.add_parser("sweep-load", help="sweep the session inter-arrival mean")
    p_load.add_argument("config")
    p_load.add_argument("--msia", type=float, nargs="+", required=True)
    p_load.add_argument("--out", default=None)
    p_load.add_argument("--trials", type=int, default=None)
    p_load.add_argument("--seed", type=int, default=None)

    p_stats = sub.add_parser("topo-stats", help="hop-distance statistics of a topology")
    p_stats.add_argument("topology", help="builtin name or JSON file path")

    args = parser.parse_args(argv)

    if args.command == "topo-stats":
        topo = resolve_topology(args.topology)
        mean, std, n = topology_stats(topo)
        print(f"{args.topology}: mean_hops={mean:.3f} std_hops={std:.3f} nodes={n}")
        return 0

    try:
        cfg = load_config(
            args.config,
            out_dir=args.out,
            trials=args.trials,
            master_seed=args.seed,
            algorithm=getattr(args, "algorithm", None),
        )
        if args.command == "run":
            agg = run_experiment(cfg)
            print(json.dumps(agg, sort_keys=True, indent=2))
        elif args.command == "sweep-rate":
            rows = sweep_ant_rate(cfg, args.rates)
            for r in rows:
                print(
                    f"interval={r['launch_interval_s']:g} overhead={r['overhead']:.6g} "
                    f"normalized_power={r['normalized_power']}"
                )
        elif args.command == "sweep-load":
            rows = sweep_load(cfg, args.msia)
            for r in rows:
                print(
                    f"msia={r['msia_s']:g} throughput={r['throughput_bps']:.6g} "
                    f"p90={r['delay_p90_s']}"
                )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
