#!/usr/bin/env python3
"""
Command-line harness for the secrecy outage toolkit.

    python cli.py capacity --config run.json --out results/
    python cli.py policy   --config run.json --out results/
    python cli.py simulate --config run.json --out results/ --workers 4
    python cli.py sizing   --config run.json --out results/
    python cli.py examples --out results/

Every command writes deterministic JSON/CSV files plus a separate
run_metadata.json (timing, memory). See README.md for the config schema.
"""

import argparse
import json
import logging
import math
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import psutil
from joblib import Parallel, delayed

import settings
from buffer_sizing import rs_variance, sizing_table, theorem6_bound
from channel_model import FadingDistribution, RandomStream, from_descriptor, to_descriptor
from errors import ConfigError, DomainError, SecrecyOutageError
from full_csi_solver import (evaluate_constant_policy, high_power_limit, r_max, solve_capacity,
                             solve_subproblem)
from key_queue_sim import outage_vs_buffer
from main_csi_solver import solve_capacity_main, solve_subproblem_main

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"
COMMANDS = ("capacity", "policy", "simulate", "sizing", "examples")
CSI_KINDS = ("full", "main")
TRACE_COLUMNS = ["M", "rate_R", "eps", "horizon", "seed", "loss_ratio", "eps_prime",
                 "eps_prime_stderr", "key_outage_freq", "channel_outage_freq",
                 "artificial_outage_freq", "identity_residual"]


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CapacityBlock:
    p_avg_grid: Tuple[float, ...] = ()
    csi: Tuple[str, ...] = CSI_KINDS
    no_power_control: bool = False


@dataclass(frozen=True)
class PolicyBlock:
    csi: str = "full"
    target: Union[str, float] = "at-capacity"
    grid_points: int = 33


@dataclass(frozen=True)
class SimulateBlock:
    rate_multipliers: Tuple[float, ...] = (1.0, 1.01, 1.02)
    buffer_grid: Optional[Tuple[float, ...]] = None
    horizon: int = 200_000
    warmup_fraction: float = 0.1
    traces: int = 1


@dataclass(frozen=True)
class SizingBlock:
    eps_primes: Tuple[float, ...] = ()
    horizon: int = 200_000
    buffer_grid: Optional[Tuple[float, ...]] = None
    simulate: bool = True


@dataclass(frozen=True)
class RunConfig:
    distribution: FadingDistribution
    p_avg: float
    eps: float
    seed: int = settings.DEFAULT_SEED
    capacity: CapacityBlock = field(default_factory=CapacityBlock)
    policy: PolicyBlock = field(default_factory=PolicyBlock)
    simulate: SimulateBlock = field(default_factory=SimulateBlock)
    sizing: SizingBlock = field(default_factory=SizingBlock)

    def p_avg_grid(self) -> Tuple[float, ...]:
        return self.capacity.p_avg_grid or (self.p_avg,)

    def to_dict(self) -> Dict:
        def block(value):
            data = asdict(value)
            return {k: list(v) if isinstance(v, tuple) else v for k, v in data.items()}
        return {
            "distribution": to_descriptor(self.distribution),
            "p_avg": self.p_avg,
            "eps": self.eps,
            "seed": self.seed,
            "capacity": {**block(self.capacity), "p_avg_grid": list(self.p_avg_grid())},
            "policy": block(self.policy),
            "simulate": block(self.simulate),
            "sizing": block(self.sizing),
        }


class _ConfigReader:
    """Field access with JSON line numbers attached to every error.

    Dicts handed out by block() remember their block name, so a key that
    repeats across blocks (csi, horizon, buffer_grid) is located inside the
    block it was read from.
    """

    def __init__(self, text: str):
        self.text = text
        self._scopes: Dict[int, str] = {}

    def _block_span(self, scope: str) -> Tuple[int, int]:
        match = re.search(r'"' + re.escape(scope) + r'"\s*:\s*\{', self.text)
        if match is None:
            return 0, len(self.text)
        depth, in_string, escaped = 0, False, False
        for i in range(match.end() - 1, len(self.text)):
            ch = self.text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return match.end(), i
        return match.end(), len(self.text)

    def line_of(self, key: str, scope: Optional[str] = None) -> Optional[int]:
        pattern = re.compile(r'"' + re.escape(key) + r'"\s*:')
        match = None
        if scope is not None:
            match = pattern.search(self.text, *self._block_span(scope))
        if match is None:
            match = pattern.search(self.text)
        if match is None:
            return None
        return self.text.count("\n", 0, match.start()) + 1

    def fail(self, key: str, message: str, scope: Optional[str] = None):
        where = key if scope is None else f"{scope}.{key}"
        raise ConfigError(f"{where}: {message}", line=self.line_of(key, scope))

    def _fail_in(self, data: Dict, key: str, message: str):
        self.fail(key, message, self._scopes.get(id(data)))

    def number(self, data: Dict, key: str, default=None, lo: float = -math.inf,
               hi: float = math.inf, lo_open: bool = False, hi_open: bool = False) -> float:
        if key not in data:
            if default is None:
                self._fail_in(data, key, "missing required field")
            return default
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self._fail_in(data, key, f"expected a finite number, got {value!r}")
        too_low = value <= lo if lo_open else value < lo
        too_high = value >= hi if hi_open else value > hi
        if too_low or too_high:
            left = "(" if lo_open else "["
            right = ")" if hi_open else "]"
            self._fail_in(data, key, f"{value!r} outside {left}{lo}, {hi}{right}")
        return float(value)

    def integer(self, data: Dict, key: str, default: int, lo: int = 0) -> int:
        value = data.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int) or value < lo:
            self._fail_in(data, key, f"expected an integer >= {lo}, got {value!r}")
        return int(value)

    def flag(self, data: Dict, key: str, default: bool) -> bool:
        value = data.get(key, default)
        if not isinstance(value, bool):
            self._fail_in(data, key, f"expected true/false, got {value!r}")
        return value

    def numbers(self, data: Dict, key: str, default, lo: float = 0.0,
                allow_none: bool = False) -> Optional[Tuple[float, ...]]:
        value = data.get(key, default)
        if value is None and allow_none:
            return None
        if not isinstance(value, (list, tuple)) or (key in data and not value):
            self._fail_in(data, key, f"expected a non-empty list of numbers, got {value!r}")
        out = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item) or item < lo:
                self._fail_in(data, key, f"entries must be finite numbers >= {lo}, got {item!r}")
            out.append(float(item))
        return tuple(out)

    def block(self, data: Dict, key: str) -> Dict:
        value = data.get(key, {})
        if not isinstance(value, dict):
            self.fail(key, "expected an object")
        self._scopes[id(value)] = key
        return value


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno)
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", line=1)
    reader = _ConfigReader(text)

    if "distribution" not in data or not isinstance(data["distribution"], dict):
        reader.fail("distribution", "missing distribution object")
    try:
        dist = from_descriptor(data["distribution"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"distribution: {exc}", line=reader.line_of("distribution"))

    p_avg = reader.number(data, "p_avg", lo=0.0)
    eps = reader.number(data, "eps", lo=0.0, hi=1.0, hi_open=True)
    seed = reader.integer(data, "seed", settings.seed())

    cap = reader.block(data, "capacity")
    csi = cap.get("csi", list(CSI_KINDS))
    if not isinstance(csi, list) or not csi or any(c not in CSI_KINDS for c in csi):
        reader.fail("csi", f"expected a list drawn from {list(CSI_KINDS)}, got {csi!r}", "capacity")
    capacity = CapacityBlock(
        p_avg_grid=reader.numbers(cap, "p_avg_grid", []),
        csi=tuple(csi),
        no_power_control=reader.flag(cap, "no_power_control", False),
    )

    pol = reader.block(data, "policy")
    target = pol.get("target", "at-capacity")
    if isinstance(target, str):
        if target not in ("at-capacity", "r_max"):
            reader.fail("target", f"expected 'at-capacity', 'r_max' or a rate, got {target!r}", "policy")
    else:
        target = reader.number(pol, "target", lo=0.0)
    policy_csi = pol.get("csi", "full")
    if policy_csi not in CSI_KINDS:
        reader.fail("csi", f"expected one of {list(CSI_KINDS)}, got {policy_csi!r}", "policy")
    policy = PolicyBlock(csi=policy_csi, target=target,
                         grid_points=reader.integer(pol, "grid_points", 33, lo=2))

    sim = reader.block(data, "simulate")
    multipliers = reader.numbers(sim, "rate_multipliers", [1.0, 1.01, 1.02])
    if any(m <= 0 for m in multipliers):
        reader.fail("rate_multipliers", "multipliers must be positive", "simulate")
    simulate = SimulateBlock(
        rate_multipliers=multipliers,
        buffer_grid=reader.numbers(sim, "buffer_grid", None, allow_none=True),
        horizon=reader.integer(sim, "horizon", 200_000, lo=1),
        warmup_fraction=reader.number(sim, "warmup_fraction", 0.1, lo=0.0, hi=1.0, hi_open=True),
        traces=reader.integer(sim, "traces", 1, lo=1),
    )

    siz = reader.block(data, "sizing")
    eps_primes = reader.numbers(siz, "eps_primes", [eps + 0.005, eps + 0.01, eps + 0.02])
    if any(not eps < e <= 1 for e in eps_primes):
        reader.fail("eps_primes", f"every eps' must lie in (eps, 1], eps={eps}", "sizing")
    sizing = SizingBlock(
        eps_primes=eps_primes,
        horizon=reader.integer(siz, "horizon", 200_000, lo=1),
        buffer_grid=reader.numbers(siz, "buffer_grid", None, allow_none=True),
        simulate=reader.flag(siz, "simulate", True),
    )
    return RunConfig(dist, p_avg, eps, seed, capacity, policy, simulate, sizing)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return parse_config(text)


def dump_effective_config(config: RunConfig, out_dir: str) -> str:
    path = os.path.join(out_dir, "effective_config.json")
    write_json(config.to_dict(), path)
    return path


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _plain(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def write_json(document: Dict, path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(document, handle, indent=2, ensure_ascii=False, default=_plain)
        handle.write("\n")


def write_csv(table: pd.DataFrame, path: str):
    table.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def _capacity_row(dist: FadingDistribution, p_avg: float, eps: float, csi: Tuple[str, ...]) -> Dict:
    solutions = {}
    full = None
    if "full" in csi:
        full = solve_capacity(dist, p_avg, eps)
        solutions["full"] = full
    if "main" in csi:
        solutions["main"] = solve_capacity_main(dist, p_avg, eps,
                                                full_capacity=None if full is None else full.capacity)
    return {"p_avg": p_avg, "solutions": {k: v.to_json_dict() for k, v in solutions.items()}}


def _sweep_job(dist, policy, rate_R, eps, grid, horizon, stream, warmup_fraction) -> pd.DataFrame:
    table = outage_vs_buffer(dist, policy, rate_R, eps, grid, horizon, stream,
                             warmup_fraction=warmup_fraction, workers=1)
    table["stream_id"] = stream.stream_id
    return table


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

class SecrecyOutageRunner:
    def __init__(self, config: Optional[RunConfig], out_dir: str, workers: Optional[int] = None):
        """
        Initialize the experiment runner

        Args:
            config: parsed run configuration (None for the examples command)
            out_dir: directory receiving every output file
            workers: joblib worker count; affects speed only
        """
        self.config = config
        self.out_dir = out_dir
        self.workers = settings.workers(workers)
        os.makedirs(out_dir, exist_ok=True)

        self.stats = {
            'capacity_solves': 0,
            'policies_solved': 0,
            'traces_simulated': 0,
            'files_written': 0,
            'processing_time': 0.0
        }
        print(f"✅ Runner ready: output in {out_dir} ({self.workers} worker(s))")

    def _out(self, name: str) -> str:
        self.stats['files_written'] += 1
        return os.path.join(self.out_dir, name)

    def _parallel(self, jobs):
        if self.workers == 1:
            return [fn(*args) for fn, args in jobs]
        return Parallel(n_jobs=self.workers)(delayed(fn)(*args) for fn, args in jobs)

    # -- commands ----------------------------------------------------------

    def cmd_capacity(self) -> Dict:
        cfg = self.config
        dist, eps = cfg.distribution, cfg.eps
        grid = sorted(cfg.p_avg_grid())
        print(f"🔍 Solving capacities over {len(grid)} power level(s), CSI: {', '.join(cfg.capacity.csi)}")
        rows = self._parallel([(_capacity_row, (dist, p, eps, cfg.capacity.csi)) for p in grid])
        rows.sort(key=lambda row: row["p_avg"])
        self.stats['capacity_solves'] += len(rows) * len(cfg.capacity.csi)

        limit = high_power_limit(dist, eps)
        table = pd.DataFrame([{
            "p_avg": row["p_avg"],
            "C_full": row["solutions"].get("full", {}).get("capacity", math.nan),
            "C_main": row["solutions"].get("main", {}).get("capacity", math.nan),
            "high_power_limit": limit,
        } for row in rows])
        document = {"eps": eps, "high_power_limit": limit, "results": rows}
        if cfg.capacity.no_power_control:
            evaluation = evaluate_constant_policy(dist, cfg.p_avg, eps)
            document["no_power_control"] = evaluation._asdict()
            print(f"📊 No power control: E[R_s] = {evaluation.expected_rs:.6g}, "
                  f"R = E[R_s]/(1-eps) = {evaluation.rate:.6g}, "
                  f"channel outage {evaluation.channel_outage_prob:.4g}"
                  + ("" if evaluation.feasible else " ⚠️ exceeds eps"))
        write_json(document, self._out("capacity_solutions.json"))
        write_csv(table, self._out("capacity.csv"))
        for _, line in table.iterrows():
            print(f"  P_avg={line['p_avg']:<8g} C_full={line['C_full']:.6f} C_main={line['C_main']:.6f}")
        return document

    def _resolve_target(self) -> Tuple[float, float]:
        cfg = self.config
        rate_max = r_max(cfg.distribution, cfg.p_avg, cfg.eps)
        target = cfg.policy.target
        if target == "r_max":
            return rate_max, rate_max
        if target == "at-capacity":
            if cfg.policy.csi == "full":
                solution = solve_capacity(cfg.distribution, cfg.p_avg, cfg.eps)
            else:
                solution = solve_capacity_main(cfg.distribution, cfg.p_avg, cfg.eps)
            self.stats['capacity_solves'] += 1
            return solution.capacity, rate_max
        return float(target), rate_max

    def cmd_policy(self) -> Dict:
        cfg = self.config
        target, rate_max = self._resolve_target()
        print(f"🔍 Solving {cfg.policy.csi}-CSI policy at R={target:.6g} (R_max={rate_max:.6g})")
        if cfg.policy.csi == "full":
            policy = solve_subproblem(cfg.distribution, cfg.p_avg, cfg.eps, target, rate_max=rate_max)
        else:
            policy = solve_subproblem_main(cfg.distribution, cfg.p_avg, cfg.eps, target, rate_max=rate_max)
        self.stats['policies_solved'] += 1
        document = {
            "csi": cfg.policy.csi,
            "target_rate": target,
            "r_max": rate_max,
            "lambda": policy.lam,
            "expected_rs": policy.expected_rs(),
            "expected_power": policy.expected_power(),
            "channel_outage_prob": policy.channel_outage_at(),
        }
        if cfg.policy.csi == "full":
            document["k"] = policy.k
            document["boundary_randomization"] = policy.region.boundary_randomization
        else:
            document["threshold_c"] = policy.threshold_c
            document["boundary_randomization"] = policy.boundary_randomization
        if cfg.distribution.is_discrete:
            document["region_table"] = policy.region_table()
            for row in document["region_table"]:
                print(f"  h={[row['h_m'], row.get('h_e', '-')]} region={row['region']} power={row['power']:.4f}")
        else:
            grid = policy.power_grid(cfg.policy.grid_points)
            write_csv(grid, self._out("policy_power_grid.csv"))
            document["region_boundary_samples"] = policy.boundary_samples()
        write_json(document, self._out("policy.json"))
        return document

    def cmd_simulate(self) -> pd.DataFrame:
        cfg = self.config
        dist, eps, sim = cfg.distribution, cfg.eps, cfg.simulate
        solution = solve_capacity(dist, cfg.p_avg, eps)
        capacity = solution.capacity
        self.stats['capacity_solves'] += 1
        if capacity <= 0:
            raise DomainError("capacity is 0; there is no key rate to buffer")
        rate_max = solution.r_max
        print(f"🔍 C_F = {capacity:.6f}; simulating {len(sim.rate_multipliers)} rate(s) x {sim.traces} trace(s)")

        jobs = []
        for rate_index, multiplier in enumerate(sorted(sim.rate_multipliers)):
            rate = multiplier * capacity
            policy = solve_subproblem(dist, cfg.p_avg, eps, rate, rate_max=rate_max)
            self.stats['policies_solved'] += 1
            grid = sim.buffer_grid or tuple(capacity * np.linspace(0.0, 50.0, 51))
            for trace in range(sim.traces):
                stream = RandomStream(cfg.seed, rate_index * sim.traces + trace)
                jobs.append((_sweep_job, (dist, policy, rate, eps, grid, sim.horizon, stream,
                                          sim.warmup_fraction)))
        tables = self._parallel(jobs)
        self.stats['traces_simulated'] += sum(len(t) for t in tables)
        merged = pd.concat(tables, ignore_index=True)
        merged = merged.sort_values(["rate_R", "stream_id", "M"], kind="mergesort").reset_index(drop=True)

        var_rs = rs_variance(solution.policy, dist)

        def bound_for(eps_prime: float) -> float:
            if not eps_prime > eps:
                return math.nan
            try:
                return theorem6_bound(capacity, eps, eps_prime, var_rs)
            except DomainError:
                return math.nan

        traces = merged[TRACE_COLUMNS + ["stream_id"]]
        loss = merged[["M", "rate_R", "stream_id", "loss_ratio"]]
        outage = merged[["M", "rate_R", "stream_id", "eps_prime", "eps_prime_stderr", "ci_halfwidth"]].copy()
        outage["bound_M"] = [bound_for(e) for e in outage["eps_prime"]]
        write_csv(traces, self._out("traces.csv"))
        write_csv(loss, self._out("loss_ratio_vs_buffer.csv"))
        write_csv(outage, self._out("outage_vs_buffer.csv"))
        worst = float(merged["identity_residual"].max())
        print(f"✅ {len(merged)} trace rows written; worst conservation residual {worst:.3g}")
        return merged

    def cmd_sizing(self) -> pd.DataFrame:
        cfg = self.config
        solution = solve_capacity(cfg.distribution, cfg.p_avg, cfg.eps)
        self.stats['capacity_solves'] += 1
        if solution.capacity <= 0:
            raise DomainError("capacity is 0; the buffer bound is undefined")
        print(f"🔍 Sizing buffers at C_F = {solution.capacity:.6f} for eps' in {list(cfg.sizing.eps_primes)}")
        table = sizing_table(cfg.distribution, solution.policy, solution.capacity, cfg.eps,
                             cfg.sizing.eps_primes, cfg.seed, horizon=cfg.sizing.horizon,
                             M_grid=cfg.sizing.buffer_grid, simulate=cfg.sizing.simulate)
        write_csv(table, self._out("sizing.csv"))
        for _, row in table.iterrows():
            print(f"  eps'={row['eps_prime']:<8g} bound M={row['bound_M']:.4g} simulated M={row['simulated_M']:.4g}")
        return table

    def cmd_examples(self) -> Dict:
        from demo_examples import run_walkthrough
        return run_walkthrough(self._out("examples.json"))

    # -- bookkeeping -------------------------------------------------------

    def get_performance_stats(self) -> Dict:
        """Get run performance statistics"""
        return {
            **self.stats,
            "memory_usage_mb": psutil.Process().memory_info().rss / 1024 / 1024,
            "workers": self.workers,
        }

    def export_results(self, command: str, filename: Optional[str] = None) -> str:
        """Write run metadata (kept apart from the deterministic result files)"""
        filename = filename or self._out("run_metadata.json")
        export_data = {
            "timestamp": datetime.now().isoformat(),
            "command": command,
            "performance_stats": self.get_performance_stats(),
        }
        write_json(export_data, filename)
        print(f"📁 Results exported to: {self.out_dir}")
        return filename

    def run(self, command: str):
        start = time.time()
        handler = getattr(self, f"cmd_{command}")
        if self.config is not None:
            dump_effective_config(self.config, self.out_dir)
        result = handler()
        self.stats['processing_time'] += time.time() - start
        self.export_results(command)
        return result


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Secrecy outage capacity and key-buffer toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=name != "examples", help="JSON run configuration")
        cmd.add_argument("--out", default="results", help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        cmd.add_argument("--workers", type=int, default=None, help="parallel workers (speed only)")
        cmd.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, settings.log_level(args.log_level), logging.INFO),
                        format=LOG_FORMAT)
    try:
        config = None
        if args.config:
            config = load_config(args.config)
            if args.seed is not None:
                config = replace(config, seed=args.seed)
        if args.workers is not None and args.workers < 1:
            raise ConfigError(f"--workers must be at least 1, got {args.workers}")
        runner = SecrecyOutageRunner(config, args.out, workers=args.workers)
        runner.run(args.command)
    except SecrecyOutageError as exc:
        logger.error("%s failed: %s", args.command, exc)
        diagnostics = getattr(exc, "diagnostics", None)
        if diagnostics:
            logger.error("diagnostics: %s", diagnostics)
        print(f"❌ {type(exc).__name__}: {exc}")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
