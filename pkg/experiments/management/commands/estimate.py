"""
Run the misalignment estimator experiments.
Usage: python manage.py estimate --solution IV --beta 0.5 --ebn0 0,5,10 --trials 1000
"""

from ._common import SimulationCommand


class Command(SimulationCommand):
    help = 'Monte Carlo MSE or squared-error density of the misalignment estimate'
    scenarios = ('estimator_mse', 'estimator_pdf')
    default_scenario = 'estimator_mse'
