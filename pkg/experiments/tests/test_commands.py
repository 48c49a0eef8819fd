import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from experiments.models import ExperimentRun, MetricsEntry


class SimulationCommandTests(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def call(self, name, *args):
        stdout = StringIO()
        call_command(name, *args, stdout=stdout)
        return stdout.getvalue()

    def test_estimate_writes_and_stores(self):
        output = self.call('estimate', '--solution', 'I', '--ebn0', '10,20', '--trials', '2',
                           '--seed', '3', '--out', str(self.out))
        self.assertIn('Wrote 2 points', output)
        self.assertTrue((self.out / 'metrics.csv').exists())
        config = json.loads((self.out / 'config.json').read_text())
        self.assertEqual(config['scenario'], 'estimator_mse')
        self.assertEqual(config['ebn0_list'], [10.0, 20.0])

        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, 'completed')
        self.assertIsNotNone(run.completed_at)
        self.assertEqual(run.output_dir, str(self.out))
        self.assertEqual(run.metrics.count(), 2)

    def test_no_store(self):
        self.call('estimate', '--scenario', 'estimator_pdf', '--ebn0', '5', '--trials', '2',
                  '--out', str(self.out), '--no-store')
        self.assertFalse(ExperimentRun.objects.exists())
        self.assertTrue((self.out / 'histogram.csv').exists())

    def test_decode(self):
        output = self.call('decode', '--solution', 'exact_tau', '--N', '16', '--L', '4', '--ebn0', '15',
                           '--trials', '2', '--out', str(self.out))
        self.assertIn('exact_tau', output)
        entry = MetricsEntry.objects.get()
        self.assertEqual(entry.L, 4)
        self.assertIsNotNone(entry.ser)
        self.assertIsNone(entry.mse_tau)

    def test_config_file_defaults(self):
        path = self.out / 'defaults.json'
        path.write_text(json.dumps({'beta': 0.75, 'trials': 2, 'ebn0': [12]}))
        self.call('estimate', '--config', str(path), '--out', str(self.out / 'res'), '--no-store')
        config = json.loads((self.out / 'res' / 'config.json').read_text())
        self.assertEqual(config['beta'], 0.75)
        self.assertEqual(config['trials'], 2)

    def test_flag_turns_off_coding_from_config_file(self):
        path = self.out / 'coded.json'
        path.write_text(json.dumps({'coded': True, 'solution': 'exact_tau', 'N': 16, 'trials': 1, 'ebn0': [15]}))
        with self.assertRaises(CommandError):
            self.call('decode', '--config', str(path), '--out', str(self.out / 'coded'), '--no-store')

        self.call('decode', '--config', str(path), '--no-coded', '--out', str(self.out / 'uncoded'), '--no-store')
        config = json.loads((self.out / 'uncoded' / 'config.json').read_text())
        self.assertFalse(config['coded'])
        self.assertEqual(config['N'], 16)

    def test_sweep_over_solutions_and_truncations(self):
        self.call('sweep', '--scenario', 'truncation_sweep', '--solutions', 'exact_tau,III', '--L-list', '2,4',
                  '--N', '12', '--ebn0', '15', '--trials', '1', '--out', str(self.out))
        self.assertEqual(ExperimentRun.objects.count(), 2)
        self.assertEqual(MetricsEntry.objects.count(), 4)
        lines = (self.out / 'metrics.csv').read_text().strip().splitlines()
        self.assertEqual(len(lines), 5)

    def test_invalid_configuration(self):
        with self.assertRaises(CommandError):
            self.call('estimate', '--solution', 'exact_tau', '--out', str(self.out), '--trials', '1')
        with self.assertRaises(CommandError):
            self.call('decode', '--beta', '2', '--out', str(self.out))
        with self.assertRaises(CommandError):
            self.call('sweep', '--solutions', 'I,VII', '--out', str(self.out))
        with self.assertRaises(CommandError):
            self.call('estimate', '--config', str(self.out / 'missing.json'))
        self.assertFalse(ExperimentRun.objects.exists())

    def test_scenario_outside_command(self):
        with self.assertRaises(CommandError):
            self.call('estimate', '--scenario', 'decoder_ser_awgn')

    def test_unwritable_output(self):
        blocker = self.out / 'file'
        blocker.write_text('x')
        with self.assertRaises(CommandError):
            self.call('estimate', '--trials', '1', '--ebn0', '10', '--out', str(blocker / 'res'), '--no-store')
