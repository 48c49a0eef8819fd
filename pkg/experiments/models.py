"""
APNC Relay Simulator - Experiment Models

Persisted Monte Carlo runs and their per-point metrics. The simulation itself
never touches the ORM; management commands store finished runs here.
"""

import uuid
import logging

from django.db import models
from django.utils import timezone

logger = logging.getLogger(__name__)


class ExperimentRun(models.Model):
    """One invocation of the harness with its full configuration."""

    SCENARIOS = [
        ('estimator_mse', 'Estimator MSE'),
        ('estimator_pdf', 'Estimator square-error PDF'),
        ('decoder_ser_awgn', 'Decoder SER (AWGN)'),
        ('decoder_per_rayleigh', 'Decoder PER (Rayleigh)'),
        ('truncation_sweep', 'Truncation sweep'),
    ]

    SOLUTIONS = [
        ('I', 'Baud estimator, baud decoder'),
        ('II', 'Double estimator, baud decoder'),
        ('III', 'Baud estimator, double decoder'),
        ('IV', 'Double estimator, double decoder'),
        ('exact_tau', 'Exact offsets'),
    ]

    RUN_STATUS = [
        ('pending', 'Pending'),
        ('running', 'Running'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    scenario = models.CharField(max_length=30, choices=SCENARIOS)
    solution = models.CharField(max_length=20, choices=SOLUTIONS)
    config = models.JSONField(default=dict, blank=True)
    seed = models.BigIntegerField(default=0)

    status = models.CharField(max_length=20, choices=RUN_STATUS, default='pending')
    output_dir = models.CharField(max_length=500, blank=True)
    failure_reason = models.TextField(blank=True)

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        db_table = 'experiment_runs'
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['scenario', 'solution'], name='experiment__scenari_5c1d2e_idx'),
            models.Index(fields=['status'], name='experiment__status_8a4f71_idx'),
            models.Index(fields=['created_at'], name='experiment__created_3b9e0c_idx'),
        ]

    def __str__(self):
        return f"{self.scenario}/{self.solution} seed={self.seed} ({self.status})"

    def save(self, *args, **kwargs):
        if self.status == 'completed' and not self.completed_at:
            self.completed_at = timezone.now()
        super().save(*args, **kwargs)

    @property
    def is_finished(self):
        return self.status in ['completed', 'failed']


class MetricsEntry(models.Model):
    """Metrics for one (Eb/N0, L, solution) point of a run."""

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='metrics')
    solution = models.CharField(max_length=20, choices=ExperimentRun.SOLUTIONS)
    ebn0 = models.FloatField()
    L = models.PositiveIntegerField()
    mse_tau = models.FloatField(null=True, blank=True)
    ser = models.FloatField(null=True, blank=True)
    per = models.FloatField(null=True, blank=True)
    good_estimate_rate = models.FloatField(null=True, blank=True)
    trials_run = models.PositiveIntegerField(default=0)
    wall_time = models.FloatField(default=0.0)
    histogram = models.JSONField(default=list, blank=True)

    class Meta:
        db_table = 'experiment_metrics'
        ordering = ['run', 'solution', 'L', 'ebn0']

    def __str__(self):
        return f"{self.run_id} {self.solution} L={self.L} Eb/N0={self.ebn0} dB"
