import csv
import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from experiments.services.harness import MetricsRecord
from experiments.services.results import METRICS_COLUMNS, ResultsError, emit_results


def make_record(**overrides):
    values = dict(
        scenario='decoder_ser_awgn', solution='IV', beta=0.5, Q=31, G=10, d=4, L=4, N=256,
        ebn0=10.0, mse_tau=None, ser=0.0125, per=0.5, good_estimate_rate=None, trials=40, seed=1,
    )
    values.update(overrides)
    return MetricsRecord(**values)


class EmitResultsTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name) / 'run'

    def tearDown(self):
        self.tmp.cleanup()

    def test_metrics_csv(self):
        records = [make_record(), make_record(ebn0=12.5, ser=1 / 3)]
        written = emit_results(records, self.out)
        with written['metrics'].open() as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(tuple(rows[0]), METRICS_COLUMNS)
        self.assertEqual(rows[0][:14], [
            'scenario', 'solution', 'beta', 'Q', 'G', 'd', 'L', 'N', 'ebn0',
            'mse_tau', 'ser', 'per', 'trials', 'seed',
        ])
        self.assertEqual(len(rows), 3)
        first = dict(zip(rows[0], rows[1]))
        self.assertEqual(first['mse_tau'], '')
        self.assertEqual(first['ser'], '0.0125')
        self.assertEqual(first['Q'], '31')
        self.assertEqual(dict(zip(rows[0], rows[2]))['ser'], '0.3333333333')
        self.assertNotIn('config', written)
        self.assertNotIn('histogram', written)

    def test_config_sidecar(self):
        written = emit_results([make_record()], self.out, config={'seed': 1, 'beta': 0.5})
        text = written['config'].read_text()
        self.assertEqual(json.loads(text), {'beta': 0.5, 'seed': 1})
        self.assertLess(text.index('beta'), text.index('seed'))

    def test_histogram_csv(self):
        record = make_record(scenario='estimator_pdf', ser=None, per=None, mse_tau=1e-4,
                             histogram=((0.0, 0.5, 1.0), (0.5, 1.0, 1.0)))
        written = emit_results([record], self.out)
        with written['histogram'].open() as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(rows[0], ['solution', 'L', 'ebn0', 'bin_lo', 'bin_hi', 'density'])
        self.assertEqual(rows[1], ['IV', '4', '10', '0', '0.5', '1'])

    def test_no_records(self):
        with self.assertRaises(ResultsError):
            emit_results([], self.out)

    def test_unwritable_destination(self):
        blocker = Path(self.tmp.name) / 'file'
        blocker.write_text('x')
        with self.assertRaises(ResultsError):
            emit_results([make_record()], blocker / 'run')
