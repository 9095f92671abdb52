import argparse
import logging
from pathlib import Path

from meqc.config import ExperimentConfig
from meqc.jobs.base import BaseJob
from meqc.jobs.gen_scenario import build_scenario
from meqc.marl.trainer import train
from meqc.utils.scenario_io import load_scenario

logger = logging.getLogger(__name__)


class trainAgents(BaseJob):
    name = "train"
    help = "train one PPO agent per user; writes checkpoint.json and learning_curve.csv"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--scenario", type=Path, default=None, help="saved scenario file to train on")
        parser.add_argument("--output-dir", type=Path, default=None, help="directory for checkpoint and curve")

    def run(self, cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
        logger.info("Running trainAgents Job...")
        seed = cfg.seeds[0]
        scenario = load_scenario(args.scenario) if args.scenario else build_scenario(cfg, seed)
        output_dir = args.output_dir or Path(cfg.output).parent / f"train_seed{seed}"
        result = train(scenario, cfg.train, seed, cfg.environment, output_dir=output_dir, settings=cfg.scenario)
        final = result.curve[-1]
        logger.info(f"trainAgents job finished after {len(result.curve)} epochs: mean_cost={final.mean_cost:.6g}")
        return result.curve_path
