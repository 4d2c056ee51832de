"""
Statistiques de travail d'une trempe de durée finie dans la chaîne XXZ
Version: 1.0.0

Les modules s'importent entre eux par leur nom (src/ sur le sys.path):
    luttinger, workstats, xxz_ed, fock_oracle, sweeps, scaling_analysis, main
"""

__version__ = "1.0.0"

__all__ = [
    'airy',
    'config',
    'errors',
    'fock_oracle',
    'luttinger',
    'main',
    'scaling_analysis',
    'sweeps',
    'workstats',
    'xxz_ed'
]
