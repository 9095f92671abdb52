import argparse
import logging
from pathlib import Path

from meqc.config import ExperimentConfig
from meqc.jobs.base import BaseJob
from meqc.utils.scenario_io import save_scenario
from meqc.workload import Scenario, gen_scenario

logger = logging.getLogger(__name__)


def build_scenario(cfg: ExperimentConfig, seed: int | None = None) -> Scenario:
    settings = cfg.scenario
    seed = settings.seed if seed is None else seed
    return gen_scenario(settings.users, settings.servers, seed, settings=settings, device=cfg.device)


class genScenario(BaseJob):
    name = "gen"
    help = "generate a seeded scenario file"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--output", type=Path, default=None, help="scenario file to write")

    def run(self, cfg: ExperimentConfig, args: argparse.Namespace) -> Path:
        logger.info("Running genScenario Job...")
        scenario = build_scenario(cfg)
        output = args.output or Path(cfg.output).parent / f"scenario_seed{scenario.seed}.json"
        path = save_scenario(scenario, output)
        logger.info(
            f"genScenario job finished: U={len(scenario.users)} E={len(scenario.servers)} "
            f"seed={scenario.seed} -> {path}"
        )
        return path
