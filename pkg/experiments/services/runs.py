"""
Run Persistence Service

Stores finished harness runs as ExperimentRun / MetricsEntry rows so they can
be browsed through the admin and the read-only API.
"""

import logging
from typing import Iterable, Optional

from django.db import transaction

from experiments.models import ExperimentRun, MetricsEntry
from experiments.services.harness import ExperimentConfig, MetricsRecord

logger = logging.getLogger(__name__)


def start_run(config: ExperimentConfig, output_dir: str = '') -> ExperimentRun:
    run = ExperimentRun.objects.create(
        scenario=config.scenario,
        solution=config.solution,
        config=config.to_dict(),
        seed=config.seed,
        status='running',
        output_dir=output_dir,
    )
    logger.info(f"HARNESS: run {run.id} started ({config.scenario}/{config.solution})")
    return run


@transaction.atomic
def complete_run(run: ExperimentRun, records: Iterable[MetricsRecord]) -> ExperimentRun:
    MetricsEntry.objects.bulk_create([
        MetricsEntry(
            run=run,
            solution=record.solution,
            ebn0=record.ebn0,
            L=record.L,
            mse_tau=record.mse_tau,
            ser=record.ser,
            per=record.per,
            good_estimate_rate=record.good_estimate_rate,
            trials_run=record.trials,
            wall_time=record.wall_time,
            histogram=[list(row) for row in record.histogram or ()],
        )
        for record in records
    ])
    run.status = 'completed'
    run.save()
    logger.info(f"HARNESS: run {run.id} completed with {run.metrics.count()} points")
    return run


def fail_run(run: Optional[ExperimentRun], reason: str) -> None:
    if run is None:
        return
    run.status = 'failed'
    run.failure_reason = reason
    run.save()
    logger.error(f"HARNESS: run {run.id} failed: {reason}")
