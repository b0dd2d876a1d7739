"""
Experiment orchestration: single runs, sweeps and the acceptance suite.
"""
