import argparse
import logging

from meqc.config import ExperimentConfig
from meqc.db_crud import fetch_runs
from meqc.jobs.base import BaseJob

logger = logging.getLogger(__name__)


def format_runs(runs) -> list[str]:
    lines = []
    for run in runs:
        finished = run.finished_at.isoformat(timespec="seconds") if run.finished_at else "-"
        lines.append(
            f"{run.id}\t{run.verb}\t{run.seed if run.seed is not None else '-'}\t{run.status}\t"
            f"{run.created_at.isoformat(timespec='seconds')}\t{finished}\t{run.output_path or '-'}"
        )
    return lines


class listRuns(BaseJob):
    name = "runs"
    help = "list runs recorded in the ledger"
    recordable = False

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--verb", default=None, help="only runs of this verb")
        parser.add_argument("--limit", type=int, default=None)

    def run(self, cfg: ExperimentConfig, args: argparse.Namespace) -> None:
        runs = fetch_runs(verb=args.verb, limit=args.limit)
        print("id\tverb\tseed\tstatus\tcreated_at\tfinished_at\toutput")
        for line in format_runs(runs):
            print(line)
        logger.info(f"Listed {len(runs)} recorded runs.")
        return None
