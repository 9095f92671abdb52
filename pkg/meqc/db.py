# meqc/db.py - Database connection and session management for the run ledger

import logging
import os

from dotenv import load_dotenv
from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, scoped_session, sessionmaker
from sqlalchemy.pool import StaticPool

load_dotenv()
logger = logging.getLogger(__name__)

DEFAULT_DATABASE_URL = "sqlite:///meqc_runs.db"
DATABASE_URL = os.getenv("MEQC_DATABASE_URL", DEFAULT_DATABASE_URL)

Base = declarative_base()

sync_engine: Engine | None = None
SyncSessionLocal = scoped_session(sessionmaker(autocommit=False, autoflush=False))


def init_engine(url: str | None = None) -> Engine:
    """(Re)bind the engine and session factory; tables are created on first use."""
    global sync_engine
    url = url or DATABASE_URL
    kwargs = {"pool_pre_ping": True}
    if url in ("sqlite://", "sqlite:///:memory:"):
        # one shared connection so every session sees the same in-memory database
        kwargs = {"connect_args": {"check_same_thread": False}, "poolclass": StaticPool}
    SyncSessionLocal.remove()
    if sync_engine is not None:
        sync_engine.dispose()
    sync_engine = create_engine(url, **kwargs)
    SyncSessionLocal.configure(bind=sync_engine)

    from meqc import models  # noqa: F401  registers the tables on Base

    Base.metadata.create_all(bind=sync_engine)
    logger.info(f"Run ledger bound to {sync_engine.url.render_as_string(hide_password=True)}")
    return sync_engine


def get_sync_session():
    if sync_engine is None:
        init_engine()
    db: Session = SyncSessionLocal()
    try:
        yield db
    finally:
        db.close()
