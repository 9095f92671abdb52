import argparse
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
import logging
import os
from pathlib import Path

import numpy as np
from dotenv import load_dotenv

from meqc.config import POLICY_NAMES, ExperimentConfig
from meqc.jobs.base import BaseJob
from meqc.jobs.gen_scenario import build_scenario
from meqc.marl.policy import HybridPolicy
from meqc.marl.trainer import MarlPolicy, train
from meqc.solvers import evaluate, make_policy
from meqc.utils.csv_export import SWEEP_COLUMNS, emit_csv
from meqc.workload import Scenario, apply_sweep_value

load_dotenv()
logger = logging.getLogger(__name__)

NO_SWEEP = "none"
DEFAULT_MAX_WORKERS = 8


@dataclass(frozen=True)
class SweepPoint:
    seed: int
    policy: str
    param: str
    value: float
    value_index: int


def _point_rng(point: SweepPoint) -> np.random.Generator:
    sequence = np.random.SeedSequence(
        entropy=point.seed, spawn_key=(point.value_index, POLICY_NAMES.index(point.policy))
    )
    return np.random.default_rng(sequence)


def evaluate_point(
    cfg: ExperimentConfig, scenario: Scenario, point: SweepPoint, agents: list[HybridPolicy] | None = None
) -> dict:
    if point.policy == "marl":
        if agents is None:
            agents = train(scenario, cfg.train, point.seed, cfg.environment, settings=cfg.scenario).agents
        policy = MarlPolicy(agents, greedy=True)
    else:
        policy = make_policy(point.policy, cfg.environment)
    stats = evaluate(policy, scenario, cfg.episodes, _point_rng(point), cfg.environment, cfg.scenario)
    return {
        "seed": point.seed,
        "policy": point.policy,
        "param": point.param,
        "value": point.value,
        "mean_cost": stats.mean_cost,
        "latency_cost": stats.latency_cost,
        "energy_cost": stats.energy_cost,
        "qpu_grant_rate": stats.qpu_grant_rate,
        "mean_success_prob": stats.mean_success_prob,
    }


def sweep_points(cfg: ExperimentConfig) -> list[SweepPoint]:
    if cfg.sweep is None:
        values, param = (0.0,), NO_SWEEP
    else:
        values, param = cfg.sweep.values, cfg.sweep.parameter.value
    return [
        SweepPoint(seed=seed, policy=policy, param=param, value=float(value), value_index=i)
        for seed in cfg.seeds
        for i, value in enumerate(values)
        for policy in cfg.policies
    ]


def _max_workers(cfg: ExperimentConfig, n_points: int) -> int:
    configured = cfg.max_workers or int(os.getenv("MEQC_MAX_WORKERS", DEFAULT_MAX_WORKERS))
    return max(1, min(configured, n_points))


def run_sweep(cfg: ExperimentConfig) -> list[dict]:
    points = sweep_points(cfg)
    base = {seed: build_scenario(cfg, seed) for seed in cfg.seeds}
    scenarios: dict[tuple[int, int], Scenario] = {}
    for point in points:
        key = (point.seed, point.value_index)
        if key not in scenarios:
            scenarios[key] = (
                base[point.seed]
                if point.param == NO_SWEEP
                else apply_sweep_value(base[point.seed], point.param, point.value)
            )

    def process_point(point: SweepPoint) -> dict:
        row = evaluate_point(cfg, scenarios[(point.seed, point.value_index)], point)
        logger.debug(f"{point.param}={point.value:g} {point.policy} seed={point.seed}: {row['mean_cost']:.6g}")
        return row

    # Parallelize as each sweep point is independent
    max_workers = _max_workers(cfg, len(points))
    rows = []
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = [executor.submit(process_point, point) for point in points]
        for f in as_completed(futures):
            rows.append(f.result())

    rows.sort(key=lambda r: (r["value"], r["policy"], r["seed"]))
    logger.info(f"Sweep finished: {len(rows)} rows over {len(cfg.seeds)} seeds with {max_workers} workers")
    return rows


class runSweep(BaseJob):
    name = "sweep"
    help = "evaluate every policy at every sweep value and seed, then write the CSV"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--output", type=Path, default=None, help="CSV file to write")

    def run(self, cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
        logger.info("Running runSweep Job...")
        rows = run_sweep(cfg)
        self.rows = rows
        path = emit_csv(rows, args.output or Path(cfg.output), columns=SWEEP_COLUMNS)
        logger.info("runSweep job finished.")
        return path
