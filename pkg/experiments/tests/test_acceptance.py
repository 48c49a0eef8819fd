"""
Long Monte Carlo checks of the headline results.

Tagged slow; the fast suite runs with `--exclude-tag slow`.
"""

import numpy as np
from django.test import SimpleTestCase, tag

from experiments.services.harness import ExperimentConfig, run_experiment


def gap_db(reference: float, other: float) -> float:
    return 10 * np.log10(reference / other)


@tag('slow')
class EstimatorAcceptanceTests(SimpleTestCase):
    trials = 20000

    def mse(self, solution, beta, ebn0):
        config = ExperimentConfig(scenario='estimator_mse', solution=solution, beta=beta, Q=31, G=10, d=4,
                                  ebn0_list=(ebn0,), trials=self.trials, seed=2017, workers=4)
        [record] = run_experiment(config)
        return record.mse_tau

    def test_double_rate_gap_at_full_rolloff(self):
        for ebn0 in (6.0, 10.0):
            gap = gap_db(self.mse('I', 1.0, ebn0), self.mse('II', 1.0, ebn0))
            self.assertGreater(gap, 6.0, f'Eb/N0={ebn0}')
            self.assertLess(gap, 10.0, f'Eb/N0={ebn0}')

    def test_estimators_coincide_without_excess_bandwidth(self):
        gap = gap_db(self.mse('I', 0.0, 10.0), self.mse('II', 0.0, 10.0))
        self.assertLess(abs(gap), 0.5)

    def test_square_error_mass_near_zero(self):
        for channel, expected, slack in (('awgn', 0.947, 0.03), ('rayleigh', 0.904, 0.04)):
            config = ExperimentConfig(scenario='estimator_pdf', solution='II', beta=0.0, Q=31, G=10, d=4,
                                      ebn0_list=(10.0,), trials=self.trials, seed=2017, channel=channel,
                                      workers=4)
            [record] = run_experiment(config)
            self.assertAlmostEqual(record.good_estimate_rate, expected, delta=slack, msg=channel)


@tag('slow')
class TruncationAcceptanceTests(SimpleTestCase):

    def test_four_symbols_are_enough_at_full_rolloff(self):
        config = ExperimentConfig(scenario='truncation_sweep', solution='exact_tau', decoder='double', beta=1.0,
                                  l_list=(2, 4, 6), ebn0_list=(6.0,), trials=400, seed=2017,
                                  max_errors=10 ** 9, workers=4)
        ser = {record.L: record.ser for record in run_experiment(config)}
        self.assertLess(abs(ser[4] - ser[6]), 0.1 * ser[6])
        self.assertGreater(ser[2], 1.25 * ser[4])
