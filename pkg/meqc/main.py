# meqc/main.py - Command line entry point: gen, eval, train, sweep, runs
import argparse
import logging
import sys

from sqlalchemy.exc import SQLAlchemyError

from meqc import db_crud
from meqc.config import load_config
from meqc.errors import InvalidConfigError, MeqcError
from meqc.jobs.registry import register_all_jobs
from meqc.logging_config import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meqc", description="Mobile edge-quantum offloading lab")
    subparsers = parser.add_subparsers(dest="verb", required=True)
    register_all_jobs(subparsers)
    return parser


def _run_job(job, cfg, args) -> int:
    run_id = None
    if args.record and job.recordable:
        run_id = db_crud.record_run_started(job.name, cfg.seeds[0], cfg.model_dump_json())
    try:
        output = job.run(cfg, args)
    except Exception:
        if run_id is not None:
            db_crud.record_run_finished(run_id, "failed")
        raise
    if run_id is not None:
        if job.rows:
            db_crud.record_sweep_rows(run_id, job.rows)
        db_crud.record_run_finished(run_id, "finished", str(output) if output else None)
    if output is not None:
        print(output)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging()

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
    except InvalidConfigError as e:
        logger.error(f"Invalid config {args.config}: {e}")
        return EXIT_CONFIG_ERROR
    except OSError as e:
        logger.error(f"Could not read config {args.config}: {e}")
        return EXIT_CONFIG_ERROR

    try:
        return _run_job(args.job, cfg, args)
    except InvalidConfigError as e:
        logger.error(f"{args.verb} failed on invalid input: {e}")
        return EXIT_CONFIG_ERROR
    except (MeqcError, OSError, SQLAlchemyError) as e:
        logger.error(f"{args.verb} failed: {e}")
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
