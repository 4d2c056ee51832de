"""
Tests unitaires pour le module d'analyse des lois d'échelle
"""

import unittest
import pandas as pd
import numpy as np
import sys
import os

# Ajouter le dossier src au path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from errors import DomainError
from scaling_analysis import (ScalingAnalyzer, fit_scaling, oscillation_amplitude, plateau_estimate,
                              renormalize, scaling_regime, theta_exponent, upper_envelope)


class TestFitScaling(unittest.TestCase):
    """Tests pour l'ajustement en loi de puissance"""

    def setUp(self):
        """Prépare des données de test"""
        self.taus = np.geomspace(10.0, 1000.0, 8)

    def test_exact_power_law(self):
        """Test de l'exposant d'une loi de puissance exacte"""
        fit = fit_scaling((self.taus, 3.0 * self.taus ** -2))

        # Vérifier l'exposant et la qualité
        self.assertAlmostEqual(fit.exponent, -2.0, places=10)
        self.assertAlmostEqual(fit.r_squared, 1.0, places=10)
        self.assertFalse(fit.log_correction)
        self.assertEqual(fit.window, (10.0, 1000.0))
        self.assertEqual(fit.n_points, 8)

    def test_pairs_input(self):
        """Test de l'entrée sous forme de couples (tau_q, valeur)"""
        fit = fit_scaling([(t, t ** -1.5) for t in self.taus])
        self.assertAlmostEqual(fit.exponent, -1.5, places=10)

    def test_log_correction_detected(self):
        """Test de la détection d'une correction logarithmique"""
        values = self.taus ** -2 * np.log(self.taus)
        fit = fit_scaling((self.taus, values), detect_log=True)

        self.assertTrue(fit.log_correction)
        self.assertAlmostEqual(fit.exponent, -2.0, places=8)

        # Sans détection, l'exposant effectif est biaisé
        plain = fit_scaling((self.taus, values))
        self.assertFalse(plain.log_correction)
        self.assertGreater(plain.exponent, -2.0)

    def test_pure_power_keeps_plain_model(self):
        """Test qu'une loi de puissance pure n'est pas marquée logarithmique"""
        fit = fit_scaling((self.taus, 5.0 * self.taus ** -1), detect_log=True)
        self.assertFalse(fit.log_correction)

    def test_invalid_inputs(self):
        """Test des entrées invalides"""
        # Trop peu de points
        with self.assertRaises(DomainError):
            fit_scaling((self.taus[:5], self.taus[:5] ** -2))
        # Valeurs non positives
        with self.assertRaises(DomainError):
            fit_scaling((self.taus, np.zeros(8)))
        # Moins d'une décade
        narrow = np.linspace(10.0, 50.0, 8)
        with self.assertRaises(DomainError):
            fit_scaling((narrow, narrow ** -2))

    def test_to_dict(self):
        """Test de la sérialisation"""
        data = fit_scaling((self.taus, self.taus ** -1)).to_dict()
        for key in ['exponent', 'log_correction', 'r_squared', 'window']:
            self.assertIn(key, data)


class TestScalingRegimes(unittest.TestCase):
    """Tests pour les exposants attendus θ_n = (d + nz)/(2a - z)"""

    def test_theta_exponent(self):
        """Test de la formule de l'exposant"""
        self.assertEqual(theta_exponent(0), 1.0)
        self.assertEqual(theta_exponent(1), 2.0)
        self.assertEqual(theta_exponent(2, d=2, z=2.0, a=2.0), 3.0)
        with self.assertRaises(DomainError):
            theta_exponent(1, z=2.0, a=1.0)

    def test_regimes(self):
        """Test des régimes puissance, logarithmique et saturé"""
        self.assertEqual(scaling_regime(0).kind, 'power')
        self.assertEqual(scaling_regime(0).exponent, -1.0)
        self.assertTrue(scaling_regime(1).log_correction)
        self.assertEqual(scaling_regime(1).exponent, -2.0)
        self.assertEqual(scaling_regime(3).kind, 'saturated')
        self.assertEqual(scaling_regime(3).exponent, -2.0)


class TestHelpers(unittest.TestCase):
    """Tests des fonctions auxiliaires"""

    def test_renormalize(self):
        """Test de |κ - κ_ref|"""
        np.testing.assert_allclose(renormalize([1.0, 3.0], 2.0), [1.0, 1.0])

    def test_plateau_estimate(self):
        """Test de la moyenne sur la dernière décade"""
        taus = [1.0, 10.0, 50.0, 100.0]
        self.assertAlmostEqual(plateau_estimate(taus, [9.0, 2.0, 2.0, 2.0]), 2.0)

    def test_upper_envelope(self):
        """Test de l'enveloppe supérieure par fenêtres"""
        taus = np.arange(0.0, 6.0, 0.5)
        values = np.sin(2 * np.pi * taus / 2.0) * np.exp(-taus)
        env_taus, env_values = upper_envelope(taus, values, period=2.0)

        # Vérifier une valeur par fenêtre
        self.assertEqual(len(env_taus), 3)
        self.assertTrue(np.all(np.diff(env_values) < 0))
        with self.assertRaises(DomainError):
            upper_envelope(taus, values, period=0.0)

    def test_oscillation_amplitude(self):
        """Test de la demi-amplitude crête à crête"""
        self.assertAlmostEqual(oscillation_amplitude([1.0, -1.0, 0.5]), 1.0)


class TestScalingAnalyzer(unittest.TestCase):
    """Tests pour la classe ScalingAnalyzer"""

    def setUp(self):
        """Prépare des balayages fictifs"""
        taus = np.geomspace(1e-3, 1e-1, 6)
        self.fast = pd.DataFrame({
            'tau_q': np.concatenate([[0.0], taus]),
            'kappa1': np.concatenate([[0.5], 0.5 + 2.0 * taus ** 2]),
            'kappa2': np.concatenate([[0.1], 0.1 - 0.3 * taus ** 2]),
            'kappa3': np.nan,
            'method': 'ttm-moments',
            'alpha': np.nan,
            'source': 'ed',
        })

        slow_taus = np.geomspace(10.0, 1000.0, 8)
        self.slow = pd.DataFrame({
            'tau_q': slow_taus,
            'kappa1': 0.2 + slow_taus ** -2 * np.log(slow_taus),
            'kappa2': 3.0 * slow_taus ** -2,
            'kappa3': 1.0 * slow_taus ** -2,
            'method': 'analytic-integral',
            'alpha': 3.51,
            'source': 'analytic',
        })
        self.references = {('analytic', 'kappa1'): 0.2, ('analytic', 'kappa2'): 0.0,
                           ('analytic', 'kappa3'): 0.0}

    def test_fast_branch(self):
        """Test de la branche rapide (référence τ_Q = 0)"""
        analyzer = ScalingAnalyzer(self.fast, branch='fast')
        renorm = analyzer.renormalized()

        # Vérifier que la ligne τ_Q = 0 est exclue
        self.assertTrue((renorm['tau_q'] > 0).all())
        self.assertNotIn('kappa3', renorm.columns)

        fits = analyzer.fit_all()
        self.assertAlmostEqual(fits['ed:kappa1'].exponent, 2.0, places=6)
        self.assertAlmostEqual(fits['ed:kappa2'].exponent, 2.0, places=6)

    def test_fast_branch_requires_sudden_row(self):
        """Test de l'absence de ligne τ_Q = 0"""
        analyzer = ScalingAnalyzer(self.fast[self.fast['tau_q'] > 0], branch='fast')
        with self.assertRaises(DomainError):
            analyzer.renormalized()

    def test_slow_branch_with_references(self):
        """Test de la branche lente avec références adiabatiques"""
        analyzer = ScalingAnalyzer(self.slow, branch='slow', references=self.references)
        fits = analyzer.fit_all()

        self.assertTrue(fits['analytic:kappa1'].log_correction)
        self.assertAlmostEqual(fits['analytic:kappa1'].exponent, -2.0, places=6)
        self.assertAlmostEqual(fits['analytic:kappa2'].exponent, -2.0, places=8)
        self.assertFalse(fits['analytic:kappa2'].log_correction)

        # Vérifier le tableau récapitulatif
        summary = analyzer.summary_frame(fits)
        self.assertEqual(len(summary), 3)
        self.assertIn('exponent', summary.columns)

    def test_slow_branch_envelope(self):
        """Test de l'ajustement sur l'enveloppe supérieure d'un signal oscillant"""
        taus = np.arange(10.0, 200.0, 0.25)
        oscillating = pd.DataFrame({
            'tau_q': taus,
            'kappa1': np.nan,
            'kappa2': np.sin(taus) ** 2 / taus ** 2,
            'kappa3': np.nan,
            'method': 'ttm-moments',
            'alpha': np.nan,
            'source': 'ed',
        })
        analyzer = ScalingAnalyzer(oscillating, branch='slow', references={('ed', 'kappa2'): 0.0},
                                   envelope_periods={'ed': np.pi})
        fit = analyzer.fit_all()['ed:kappa2']

        self.assertTrue(fit.envelope)
        self.assertLess(abs(fit.exponent + 2.0), 0.05)
        self.assertGreater(fit.r_squared, 0.99)
        self.assertTrue(fit.to_dict()['envelope'])

    def test_invalid_branch(self):
        """Test d'une branche inconnue"""
        with self.assertRaises(DomainError):
            ScalingAnalyzer(self.slow, branch='medium')
        with self.assertRaises(DomainError):
            ScalingAnalyzer(self.fast, branch='fast', envelope_periods={'ed': 1.0})
        with self.assertRaises(DomainError):
            ScalingAnalyzer(self.slow, branch='slow', envelope_periods={'ed': 0.0})


if __name__ == '__main__':
    unittest.main()
