"""
Run one scenario for several solutions and/or truncation lengths.
Usage: python manage.py sweep --scenario truncation_sweep --solution exact_tau --L-list 2,4,6,8
       python manage.py sweep --scenario decoder_ser_awgn --solutions I,II,III,IV
"""

from dataclasses import replace

from django.core.management.base import CommandError

from experiments.services.harness import SCENARIOS, SOLUTIONS, ConfigError

from ._common import SimulationCommand


class Command(SimulationCommand):
    help = 'Sweep a scenario over solutions and truncation lengths into one result set'
    scenarios = SCENARIOS
    default_scenario = 'truncation_sweep'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--solutions', type=str, help='Comma-separated solutions to compare')
        parser.add_argument('--L-list', type=str, dest='l_list', help='Comma-separated truncation lengths')

    def build_configs(self, options):
        configs = super().build_configs(options)
        if not options.get('solutions'):
            return configs

        solutions = [s.strip() for s in options['solutions'].split(',') if s.strip()]
        unknown = [s for s in solutions if s not in SOLUTIONS]
        if unknown:
            raise CommandError(f"Unknown solutions: {', '.join(unknown)}")
        try:
            return [replace(configs[0], solution=solution) for solution in solutions]
        except ConfigError as e:
            raise CommandError(f'Invalid configuration: {e}')
