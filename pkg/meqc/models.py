# meqc/models.py - Run ledger tables

from datetime import datetime, timezone

from sqlalchemy import Column, DateTime, Float, ForeignKey, Index, Integer, String, Text
from sqlalchemy.orm import relationship

from meqc.db import Base


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class ExperimentRun(Base):
    __tablename__ = "experiment_runs"
    id = Column(Integer, primary_key=True, index=True)
    verb = Column(String, nullable=False, index=True)  # gen | eval | train | sweep
    seed = Column(Integer, nullable=True)
    config_json = Column(Text, nullable=False)
    status = Column(String, nullable=False, default="running")  # running | finished | failed
    output_path = Column(String, nullable=True)
    created_at = Column(DateTime(timezone=True), nullable=False, default=_utcnow)
    finished_at = Column(DateTime(timezone=True), nullable=True)

    results = relationship("SweepResult", back_populates="run", cascade="all, delete-orphan")


class SweepResult(Base):
    __tablename__ = "sweep_results"
    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("experiment_runs.id"), nullable=False, index=True)
    seed = Column(Integer, nullable=False)
    policy = Column(String, nullable=False)
    param = Column(String, nullable=False)
    value = Column(Float, nullable=False)
    mean_cost = Column(Float, nullable=False)
    latency_cost = Column(Float, nullable=False)
    energy_cost = Column(Float, nullable=False)
    qpu_grant_rate = Column(Float, nullable=False)
    mean_success_prob = Column(Float, nullable=False)

    run = relationship("ExperimentRun", back_populates="results")

    __table_args__ = (Index("idx_sweep_run_value_policy_seed", "run_id", "value", "policy", "seed"),)
