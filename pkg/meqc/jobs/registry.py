# meqc/jobs/registry.py
from meqc.jobs.base import BaseJob
from meqc.jobs.eval_policies import evalPolicies
from meqc.jobs.gen_scenario import genScenario
from meqc.jobs.list_runs import listRuns
from meqc.jobs.run_sweep import runSweep
from meqc.jobs.train_agents import trainAgents


def all_jobs() -> list[BaseJob]:
    return [genScenario(), evalPolicies(), trainAgents(), runSweep(), listRuns()]


def register_all_jobs(subparsers) -> dict[str, BaseJob]:
    jobs = all_jobs()
    for job in jobs:
        job.register(subparsers)
    return {job.name: job for job in jobs}
