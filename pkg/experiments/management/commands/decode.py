"""
Run the PNC decoder experiments.
Usage: python manage.py decode --scenario decoder_per_rayleigh --solution IV --L 4 --ebn0 10,15,20
"""

from ._common import SimulationCommand


class Command(SimulationCommand):
    help = 'Monte Carlo XOR symbol or packet error rate of the PNC decoder'
    scenarios = ('decoder_ser_awgn', 'decoder_per_rayleigh')
    default_scenario = 'decoder_ser_awgn'
