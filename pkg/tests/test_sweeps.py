"""
Tests unitaires pour le module de balayage en τ_Q
"""

import unittest
import math
import tempfile
import numpy as np
import pandas as pd
import sys
import os

# Ajouter le dossier src au path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from errors import DomainError
from luttinger import QuenchProtocol, luttinger_params
from scaling_analysis import ScalingAnalyzer
from sweeps import (SweepCollector, SweepSpec, adiabatic_references, ed_adiabatic_references,
                    oscillation_period)
from xxz_ed import ChainSpec, EdOptions, build_hamiltonian, ground_state

ALPHA = 3.51


class TestSweepSpec(unittest.TestCase):
    """Tests de la grille de balayage"""

    def test_values(self):
        """Test des grilles logarithmique et linéaire"""
        spec = SweepSpec(10.0, 1000.0, 3)
        np.testing.assert_allclose(spec.values(), [10.0, 100.0, 1000.0])
        linear = SweepSpec(1.0, 3.0, 3, log_spaced=False, include_zero=True)
        np.testing.assert_allclose(linear.values(), [0.0, 1.0, 2.0, 3.0])

    def test_from_dict(self):
        """Test de la lecture {min, max, points}"""
        spec = SweepSpec.from_dict({'min': 1, 'max': 100, 'points': 5})
        self.assertEqual(spec.points, 5)
        self.assertTrue(spec.log_spaced)
        self.assertFalse(spec.include_zero)

    def test_validation(self):
        """Test des grilles invalides"""
        with self.assertRaises(DomainError):
            SweepSpec(1.0, 10.0, 1)
        with self.assertRaises(DomainError):
            SweepSpec(0.0, 10.0, 5)
        with self.assertRaises(DomainError):
            SweepSpec(10.0, 1.0, 5)
        with self.assertRaises(DomainError):
            SweepSpec(1.0, math.inf, 5)


class TestAdiabaticReferences(unittest.TestCase):
    """Tests des références adiabatiques"""

    def test_values(self):
        """Test de κ₁ = Nμ, κ₂ = κ₃ = 0"""
        p = QuenchProtocol(delta_f=0.1)
        refs = adiabatic_references(p, 12, ALPHA)
        mu = (luttinger_params(0.1).v - 1.0) / (math.pi * ALPHA ** 2)
        self.assertAlmostEqual(refs[('analytic', 'kappa1')], 12 * mu, places=14)
        self.assertEqual(refs[('analytic', 'kappa2')], 0.0)
        self.assertIn(('ed', 'kappa3'), adiabatic_references(p, 12, ALPHA, source='ed'))

    def test_ed_values(self):
        """Test de κ₁ = E_g(Δ_f) - E_g(0) pour la chaîne finie"""
        p = QuenchProtocol(delta_f=0.1)
        spec = ChainSpec(6)
        e_initial, _ = ground_state(build_hamiltonian(spec, 0.0), spec)
        e_final, _ = ground_state(build_hamiltonian(spec, 0.1), spec)

        refs = ed_adiabatic_references(p, 6)
        self.assertAlmostEqual(refs[('ed', 'kappa1')], e_final - e_initial, places=12)
        self.assertEqual(refs[('ed', 'kappa2')], 0.0)
        with self.assertRaises(DomainError):
            ed_adiabatic_references(p.with_beta(2.0), 6)

    def test_oscillation_period(self):
        """Test de la période π/(J q_min)"""
        self.assertAlmostEqual(oscillation_period(12), 6.0)
        self.assertAlmostEqual(oscillation_period(4, J=2.0), 1.0)
        with self.assertRaises(DomainError):
            oscillation_period(1)


class TestSweepCollector(unittest.TestCase):
    """Tests pour la classe SweepCollector"""

    def setUp(self):
        """Prépare un protocole de test"""
        self.p = QuenchProtocol(delta_f=0.1)

    def test_slow_branch_exponents(self):
        """Test des exposants de la branche lente analytique"""
        taus = np.geomspace(10.0, 1000.0, 8)
        collector = SweepCollector(self.p, taus, N=12, alpha=ALPHA)
        data = collector.collect_all(sources=('analytic',))

        # Vérifier la structure
        self.assertEqual(len(data), 8)
        self.assertEqual(list(data.columns), ['tau_q', 'kappa1', 'kappa2', 'kappa3', 'method', 'alpha', 'source'])
        self.assertTrue((data['method'] == 'analytic-integral').all())

        analyzer = ScalingAnalyzer(data.assign(kappa3=np.nan), branch='slow',
                                   references=adiabatic_references(self.p, 12, ALPHA))
        fits = analyzer.fit_all()
        self.assertLess(abs(fits['analytic:kappa2'].exponent + 2.0), 0.05)
        self.assertTrue(fits['analytic:kappa1'].log_correction)
        self.assertLess(abs(fits['analytic:kappa1'].exponent + 2.0), 0.1)

    def test_ed_slow_branch_envelope(self):
        """Test de l'enveloppe supérieure de κ₂ ED ∝ τ_Q^{-2} en trempe lente"""
        N = 4
        period = oscillation_period(N)
        windows = [0, 1, 2, 3, 5, 8, 12, 18, 27]
        taus = [2.0 + period * (w + j / 6.0) for w in windows for j in range(6)]
        collector = SweepCollector(self.p, taus, N=N, ed_options=EdOptions(state_tol=1e-6))
        data = collector.collect_ed()

        analyzer = ScalingAnalyzer(data, branch='slow', references=ed_adiabatic_references(self.p, N),
                                   envelope_periods={'ed': period})
        fits = analyzer.fit_all()

        # Vérifier qu'un point est retenu par fenêtre d'oscillation
        self.assertTrue(fits['ed:kappa2'].envelope)
        self.assertEqual(fits['ed:kappa2'].n_points, len(windows))
        self.assertGreaterEqual(fits['ed:kappa2'].exponent, -2.3)
        self.assertLessEqual(fits['ed:kappa2'].exponent, -1.7)
        self.assertIn('envelope', analyzer.summary_frame(fits).columns)

    def test_collect_ed(self):
        """Test de la collecte par diagonalisation exacte"""
        collector = SweepCollector(self.p, [0.0, 0.01, 0.1], N=4)
        data = collector.collect_ed()

        self.assertEqual(data['tau_q'].tolist(), [0.0, 0.01, 0.1])
        self.assertTrue((data['source'] == 'ed').all())
        self.assertTrue((data['method'] == 'ttm-moments').all())
        self.assertTrue((data['kappa2'] >= 0).all())
        self.assertTrue(data['alpha'].isna().all())

    def test_parallel_matches_sequential(self):
        """Test de l'ordre et des valeurs avec plusieurs processus"""
        taus = [0.0, 0.05, 0.5, 1.0]
        sequential = SweepCollector(self.p, taus, N=6).collect_ed()
        parallel = SweepCollector(self.p, taus, N=6, workers=2).collect_ed()
        pd.testing.assert_frame_equal(sequential, parallel, check_exact=False, rtol=1e-12)

    def test_summary_and_save(self):
        """Test du résumé et de la sauvegarde"""
        collector = SweepCollector(self.p, [0.0, 0.1], N=4)
        with self.assertRaises(DomainError):
            collector.get_data_summary()

        data = collector.collect_all(sources=('ed',))
        summary = collector.get_data_summary()
        self.assertEqual(summary['n_rows'], 2)
        self.assertEqual(summary['sources'], ['ed'])
        self.assertEqual(summary['tau_range'], (0.0, 0.1))

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'sweep.csv')
            collector.save_data(data, path)
            loaded = pd.read_csv(path, float_precision='round_trip')
        self.assertEqual(loaded['kappa1'].tolist(), data['kappa1'].tolist())

    def test_invalid_inputs(self):
        """Test des entrées invalides"""
        with self.assertRaises(DomainError):
            SweepCollector(self.p, [], N=4)
        with self.assertRaises(DomainError):
            SweepCollector(self.p, [-1.0], N=4)
        collector = SweepCollector(self.p, [1.0], N=4)
        with self.assertRaises(DomainError):
            collector.collect_analytic()
        with self.assertRaises(DomainError):
            collector.collect_all(sources=('dmrg',))
        with self.assertRaises(DomainError):
            SweepCollector(self.p, [1.0], N=4, alpha=ALPHA).collect_analytic(method='quadrature')


if __name__ == '__main__':
    unittest.main()
