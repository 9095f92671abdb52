# meqc/jobs/base.py
from abc import ABC, abstractmethod
import argparse
from pathlib import Path

from meqc.config import ExperimentConfig

# ABCs -> Abstract Base Classes


class BaseJob(ABC):
    name: str = ""
    help: str = ""
    # whether the CLI may record this job in the run ledger
    recordable: bool = True
    # rows the last run produced, for the run ledger
    rows: list[dict] | None = None

    @abstractmethod
    def run(self, cfg: ExperimentConfig, args: argparse.Namespace) -> Path | None:
        """Run the job logic; returns the main output path, if any."""

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """Verb-specific flags on top of the shared --config/--seed/--record."""

    def register(self, subparsers) -> argparse.ArgumentParser:
        """Register this job as a CLI verb."""
        parser = subparsers.add_parser(self.name, help=self.help)
        parser.add_argument("--config", type=Path, default=None, help="experiment config (JSON)")
        parser.add_argument("--seed", type=int, default=None, help="override scenario and run seed")
        parser.add_argument("--record", action="store_true", help="record the run in the ledger")
        self.add_arguments(parser)
        parser.set_defaults(job=self)
        return parser
