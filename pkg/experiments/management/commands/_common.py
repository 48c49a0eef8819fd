"""
Shared plumbing for the simulation management commands.

Each command picks the scenarios it accepts; option parsing, configuration
merging, persistence and result files are handled here.
"""

import argparse
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from experiments.services.harness import ConfigError, ExperimentConfig, MetricsRecord, run_experiment
from experiments.services.results import ResultsError, emit_results
from experiments.services.runs import complete_run, fail_run, start_run
from phy.exceptions import PhyError

logger = logging.getLogger(__name__)

CONFIG_OPTIONS = (
    'scenario', 'solution', 'beta', 'Q', 'G', 'd', 'L', 'N', 'ebn0', 'trials', 'seed',
    'channel', 'coded', 'decoder', 'l_list', 'max_errors', 'batch_size', 'workers',
)


def _format(value) -> str:
    return '-' if value is None else f"{value:.4g}"


class SimulationCommand(BaseCommand):
    scenarios: tuple = ()
    default_scenario: Optional[str] = None

    def add_arguments(self, parser):
        parser.add_argument('--scenario', choices=self.scenarios, default=None,
                            help=f'Scenario to run (default: {self.default_scenario})')
        parser.add_argument('--solution', type=str, help='Solution: I, II, III, IV or exact_tau')
        parser.add_argument('--beta', type=float, help='RRC roll-off factor in [0, 1]')
        parser.add_argument('--Q', type=int, help='Zadoff-Chu length (odd)')
        parser.add_argument('--G', type=int, help='Cyclic prefix/suffix length (default: Q // 3)')
        parser.add_argument('--d', type=int, help='Correlation window half-width')
        parser.add_argument('--L', type=int, help='Decoder truncation length')
        parser.add_argument('--N', type=int, help='Payload symbols per packet')
        parser.add_argument('--ebn0', type=str, help='Comma-separated Eb/N0 points in dB')
        parser.add_argument('--trials', type=int, help='Packets per Eb/N0 point')
        parser.add_argument('--seed', type=int, help='Master seed')
        parser.add_argument('--channel', choices=('awgn', 'rayleigh'), help='Channel model')
        parser.add_argument('--coded', action=argparse.BooleanOptionalAction, default=None,
                            help='Use (or with --no-coded, skip) the LDPC code with XOR channel decoding')
        parser.add_argument('--decoder', choices=('baud', 'double'), help='Decoder used with exact_tau')
        parser.add_argument('--max-errors', type=int, dest='max_errors', help='Stop a point after this many errors')
        parser.add_argument('--batch-size', type=int, dest='batch_size', help='Trials per batch')
        parser.add_argument('--workers', type=int, help='Worker processes (1 runs in-process)')
        parser.add_argument('--config', type=str, help='JSON file with configuration defaults')
        parser.add_argument('--out', type=str, help='Output directory for the result files')
        parser.add_argument('--no-store', action='store_true', dest='no_store',
                            help='Do not persist the run in the database')

    def base_options(self, options) -> Dict:
        path = options.get('config')
        if not path:
            return {}
        try:
            base = json.loads(Path(path).read_text())
        except (OSError, ValueError) as e:
            raise CommandError(f'Cannot read config file {path}: {e}')
        if not isinstance(base, dict):
            raise CommandError(f'Config file {path} must hold a JSON object')
        return base

    def build_configs(self, options) -> List[ExperimentConfig]:
        values = {name: options.get(name) for name in CONFIG_OPTIONS}
        base = self.base_options(options)
        if values['scenario'] is None and 'scenario' not in base:
            values['scenario'] = self.default_scenario
        try:
            config = ExperimentConfig.from_options(values, base)
        except ConfigError as e:
            raise CommandError(f'Invalid configuration: {e}')
        if config.scenario not in self.scenarios:
            raise CommandError(f"Scenario '{config.scenario}' is not available in this command")
        return [config]

    def output_dir(self, options, config: ExperimentConfig) -> Path:
        if options.get('out'):
            return Path(options['out'])
        root = Path(settings.SIMULATION_CONFIG['HARNESS']['OUTPUT_DIR'])
        return root / f'{config.scenario}_{config.solution}_seed{config.seed}'

    def handle(self, *args, **options):
        configs = self.build_configs(options)
        out = self.output_dir(options, configs[0])
        store = not options.get('no_store')

        records: List[MetricsRecord] = []
        for config in configs:
            run = start_run(config, str(out)) if store else None
            try:
                config_records = run_experiment(config)
            except (PhyError, ConfigError) as e:
                fail_run(run, str(e))
                raise CommandError(f'Simulation failed: {e}')
            if run is not None:
                complete_run(run, config_records)
            records.extend(config_records)

        sidecar = configs[0].to_dict() if len(configs) == 1 else {'runs': [c.to_dict() for c in configs]}
        try:
            written = emit_results(records, out, config=sidecar)
        except ResultsError as e:
            raise CommandError(str(e))

        for record in records:
            self.stdout.write(
                f'{record.solution:>9} L={record.L:<3} Eb/N0={record.ebn0:>5g} dB  '
                f'mse={_format(record.mse_tau)} ser={_format(record.ser)} per={_format(record.per)} '
                f'trials={record.trials}'
            )
        self.stdout.write(
            self.style.SUCCESS(f'Wrote {len(records)} points to {written["metrics"].parent}')
        )
