import argparse
import logging
from pathlib import Path

from meqc.config import ExperimentConfig
from meqc.jobs.base import BaseJob
from meqc.jobs.gen_scenario import build_scenario
from meqc.jobs.run_sweep import NO_SWEEP, SweepPoint, evaluate_point
from meqc.marl.trainer import load_checkpoint
from meqc.utils.csv_export import SWEEP_COLUMNS, emit_csv
from meqc.utils.scenario_io import load_scenario

logger = logging.getLogger(__name__)


def eval_policies(
    cfg: ExperimentConfig, scenario_path: Path | None = None, checkpoint: Path | None = None
) -> list[dict]:
    """With a checkpoint, "marl" runs the saved agents instead of training new ones."""
    agents = None
    policies = cfg.policies
    if checkpoint is not None:
        agents = load_checkpoint(checkpoint)
        logger.info(f"Loaded {len(agents)} agents from {checkpoint}")
        if "marl" not in policies:
            policies = (*policies, "marl")
    rows = []
    for seed in cfg.seeds:
        scenario = load_scenario(scenario_path) if scenario_path else build_scenario(cfg, seed)
        for policy in policies:
            point = SweepPoint(seed=seed, policy=policy, param=NO_SWEEP, value=0.0, value_index=0)
            row = evaluate_point(cfg, scenario, point, agents)
            logger.info(f"seed={seed} {policy}: mean_cost={row['mean_cost']:.6g}")
            rows.append(row)
    rows.sort(key=lambda r: (r["policy"], r["seed"]))
    return rows


class evalPolicies(BaseJob):
    name = "eval"
    help = "evaluate the configured policies on a generated or saved scenario"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--scenario", type=Path, default=None, help="saved scenario file to evaluate")
        parser.add_argument("--checkpoint", type=Path, default=None, help="trained agents to evaluate as marl")
        parser.add_argument("--output", type=Path, default=None, help="CSV file to write")

    def run(self, cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
        logger.info("Running evalPolicies Job...")
        self.rows = eval_policies(cfg, args.scenario, args.checkpoint)
        output = args.output or Path(cfg.output).parent / "eval.csv"
        path = emit_csv(self.rows, output, columns=SWEEP_COLUMNS)
        logger.info("evalPolicies job finished.")
        return path
