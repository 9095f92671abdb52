# meqc/db_crud.py - Run ledger reads and writes

from datetime import datetime, timezone
import logging

from sqlalchemy import select
from sqlalchemy.orm import Session

from meqc.db import get_sync_session
from meqc.models import ExperimentRun, SweepResult
from meqc.utils.csv_export import SWEEP_COLUMNS

logger = logging.getLogger(__name__)


def record_run_started(verb: str, seed: int | None, config_json: str) -> int:
    session_gen = get_sync_session()
    db: Session = next(session_gen)
    try:
        run = ExperimentRun(verb=verb, seed=seed, config_json=config_json, status="running")
        db.add(run)
        db.commit()
        logger.info(f"Recorded run {run.id} ({verb}, seed={seed})")
        return run.id
    except Exception as e:
        db.rollback()
        logger.error(f"Error recording {verb} run: {e}")
        raise
    finally:
        db.close()


def record_run_finished(run_id: int, status: str, output_path: str | None = None) -> None:
    session_gen = get_sync_session()
    db: Session = next(session_gen)
    try:
        run = db.get(ExperimentRun, run_id)
        if run is None:
            logger.warning(f"Run {run_id} not found in the ledger, skipping status update.")
            return
        run.status = status
        run.output_path = output_path
        run.finished_at = datetime.now(timezone.utc)
        db.commit()
        logger.info(f"Run {run_id} marked {status}.")
    except Exception as e:
        db.rollback()
        logger.error(f"Error finishing run {run_id}: {e}")
        raise
    finally:
        db.close()


def record_sweep_rows(run_id: int, rows: list[dict]) -> int:
    if not rows:
        logger.info(f"No sweep rows for run {run_id}, skipping DB sync.")
        return 0
    session_gen = get_sync_session()
    db: Session = next(session_gen)
    try:
        db.add_all([SweepResult(run_id=run_id, **{c: row[c] for c in SWEEP_COLUMNS}) for row in rows])
        db.commit()
        logger.info(f"Run {run_id}: inserted {len(rows)} sweep rows.")
        return len(rows)
    except Exception as e:
        db.rollback()
        logger.error(f"Run {run_id}: failed to insert sweep rows: {e}")
        raise
    finally:
        db.close()


def fetch_runs(verb: str | None = None, limit: int | None = None) -> list[ExperimentRun]:
    session_gen = get_sync_session()
    db: Session = next(session_gen)
    try:
        stmt = select(ExperimentRun).order_by(ExperimentRun.id)
        if verb is not None:
            stmt = stmt.where(ExperimentRun.verb == verb)
        if limit is not None:
            stmt = stmt.limit(limit)
        runs = db.execute(stmt).scalars().all()
        # detach with loaded attributes so callers can read them after close
        for run in runs:
            db.expunge(run)
        return list(runs)
    finally:
        db.close()


def fetch_sweep_rows(run_id: int) -> list[dict]:
    session_gen = get_sync_session()
    db: Session = next(session_gen)
    try:
        results = db.execute(
            select(SweepResult)
            .where(SweepResult.run_id == run_id)
            .order_by(SweepResult.value, SweepResult.policy, SweepResult.seed)
        ).scalars().all()
        return [{c: getattr(r, c) for c in SWEEP_COLUMNS} for r in results]
    finally:
        db.close()
