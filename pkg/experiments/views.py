"""
Experiment API Views

Read-only access to stored runs and their metrics.
"""

import logging

from rest_framework import status
from rest_framework.pagination import PageNumberPagination
from rest_framework.response import Response
from rest_framework.views import APIView

from .models import ExperimentRun

logger = logging.getLogger(__name__)


def run_summary(run):
    return {
        'id': str(run.id),
        'scenario': run.scenario,
        'solution': run.solution,
        'seed': run.seed,
        'status': run.status,
        'output_dir': run.output_dir,
        'created_at': run.created_at.isoformat() if run.created_at else None,
        'completed_at': run.completed_at.isoformat() if run.completed_at else None,
    }


def metrics_row(entry):
    return {
        'solution': entry.solution,
        'ebn0': entry.ebn0,
        'L': entry.L,
        'mse_tau': entry.mse_tau,
        'ser': entry.ser,
        'per': entry.per,
        'good_estimate_rate': entry.good_estimate_rate,
        'trials': entry.trials_run,
        'wall_time': entry.wall_time,
        'histogram': entry.histogram,
    }


class ExperimentRunListView(APIView):
    """
    Stored runs, newest first. Optional filters: ?scenario=, ?solution=, ?status=
    """
    permission_classes = []

    def get(self, request):
        runs = ExperimentRun.objects.all()
        for name in ('scenario', 'solution', 'status'):
            value = request.query_params.get(name)
            if value:
                runs = runs.filter(**{name: value})

        paginator = PageNumberPagination()
        page = paginator.paginate_queryset(runs, request, view=self)
        return paginator.get_paginated_response([run_summary(run) for run in page])


class ExperimentRunDetailView(APIView):
    """One run with its configuration and per-point metrics."""
    permission_classes = []

    def get(self, request, run_id):
        try:
            run = ExperimentRun.objects.prefetch_related('metrics').get(id=run_id)
        except ExperimentRun.DoesNotExist:
            return Response({
                'error': 'Experiment run not found'
            }, status=status.HTTP_404_NOT_FOUND)

        response_data = run_summary(run)
        response_data['config'] = run.config
        response_data['metrics'] = [metrics_row(entry) for entry in run.metrics.all()]
        if run.failure_reason:
            response_data['failure_reason'] = run.failure_reason
        return Response(response_data)
