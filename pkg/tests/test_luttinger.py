"""
Tests unitaires pour le module de liquide de Luttinger (paramètres, équation de mode)
"""

import unittest
import math
import json
import tempfile
import numpy as np
from hypothesis import given, settings, strategies as st
import sys
import os

# Ajouter le dossier src au path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from errors import DomainError
from luttinger import (ModeSolverOptions, QuenchProtocol, airy_asymptotic_f_minus, airy_f_minus,
                       bogoliubov_map, coupling_profile, luttinger_params, lz_moment, mode_energies,
                       pq_asymptotic, pq_landau_zener, save_modes_json, solve_mode, solve_modes)

complexes = st.builds(complex, st.floats(-10, 10), st.floats(-10, 10))


class TestLuttingerParams(unittest.TestCase):
    """Tests des paramètres de Bethe v(Δ), K(Δ)"""

    def test_free_fermions(self):
        """Test du point XX: v = J, K = 1"""
        params = luttinger_params(0.0)
        self.assertAlmostEqual(params.v, 1.0, places=14)
        self.assertAlmostEqual(params.K, 1.0, places=14)

    def test_known_value(self):
        """Test de Δ = 1/2: v = 3√3/4, K = 3/4"""
        params = luttinger_params(0.5, J=2.0)
        self.assertAlmostEqual(params.v, 2.0 * 3.0 * math.sqrt(3.0) / 4.0, places=12)
        self.assertAlmostEqual(params.K, 0.75, places=12)

    def test_isotropic_limits(self):
        """Test des points Δ = ±1"""
        self.assertEqual(luttinger_params(1.0).v, 0.0)
        self.assertEqual(luttinger_params(1.0).K, 0.5)
        self.assertTrue(math.isinf(luttinger_params(-1.0).K))

    def test_outside_critical_phase(self):
        """Test du refus de |Δ| > 1"""
        with self.assertRaises(DomainError):
            luttinger_params(1.5)
        with self.assertRaises(DomainError):
            luttinger_params(float('nan'))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-0.99, 0.99))
    def test_monotonic_k(self, delta):
        """Test de la décroissance de K avec Δ et de la positivité de v"""
        params = luttinger_params(delta)
        self.assertGreater(params.v, 0.0)
        self.assertGreater(params.K, luttinger_params(min(delta + 0.005, 0.999)).K - 1e-15)


class TestQuenchProtocol(unittest.TestCase):
    """Tests du protocole de trempe"""

    def test_validation(self):
        """Test des paramètres invalides"""
        with self.assertRaises(DomainError):
            QuenchProtocol(delta_f=1.0)
        with self.assertRaises(DomainError):
            QuenchProtocol(tau_q=-1.0)
        with self.assertRaises(DomainError):
            QuenchProtocol(J=0.0)
        with self.assertRaises(DomainError):
            QuenchProtocol(beta=-1.0)

    def test_ramp(self):
        """Test de la rampe linéaire Δ(t)"""
        p = QuenchProtocol(delta_f=0.2, tau_q=4.0)
        self.assertAlmostEqual(p.delta(2.0), 0.1)
        self.assertAlmostEqual(p.p0, (0.2 / math.pi) ** 2)
        self.assertEqual(QuenchProtocol(tau_q=0.0).delta(0.0), 0.0)
        self.assertTrue(p.is_ground_state)
        self.assertFalse(p.with_beta(2.0).is_ground_state)
        self.assertEqual(p.with_tau(8.0).tau_q, 8.0)
        self.assertEqual(p.to_dict()['beta'], 'inf')

    def test_coupling_profile(self):
        """Test des couplages g₂, g₄ nuls au point XX"""
        p = QuenchProtocol(delta_f=0.1, tau_q=5.0)
        one_plus_g4, g2 = coupling_profile(0.0, p)
        self.assertAlmostEqual(one_plus_g4, 1.0, places=12)
        self.assertAlmostEqual(g2, 0.0, places=12)
        with self.assertRaises(DomainError):
            coupling_profile(6.0, p)


class TestModeEquation(unittest.TestCase):
    """Tests de l'équation de mode et de sa solution"""

    def setUp(self):
        """Protocole de référence"""
        self.p = QuenchProtocol(delta_f=0.1, tau_q=10.0)

    @settings(max_examples=50, deadline=None)
    @given(complexes, complexes, st.floats(-2.0, 2.0))
    def test_bogoliubov_is_symplectic(self, x1, x2, gamma):
        """Test de la conservation de |x₁|² - |x₂|²"""
        y1, y2 = bogoliubov_map(x1, x2, gamma)
        scale = (1.0 + abs(x1) ** 2 + abs(x2) ** 2) * math.cosh(2.0 * gamma)
        self.assertLess(abs((abs(y1) ** 2 - abs(y2) ** 2) - (abs(x1) ** 2 - abs(x2) ** 2)), 1e-10 * scale)

    def test_constraints(self):
        """Test des contraintes canoniques en fin de rampe"""
        mode = solve_mode(0.5, self.p)
        self.assertLess(abs(mode.x_constraint - 1.0), 1e-6)
        self.assertLess(abs(mode.y_constraint - 1.0), 1e-6)
        self.assertAlmostEqual(mode.p_q, abs(mode.y2) ** 2)
        self.assertAlmostEqual(mode.Q_q, 1.0 - 2.0 * mode.p_q)
        self.assertAlmostEqual(mode.bosonic_weight, 1.0 + 2.0 * mode.p_q)
        self.assertGreater(mode.steps, 0)

    def test_sudden_limit(self):
        """Test de τ_Q = 0: p_q = sinh²(ln K / 2)"""
        mode = solve_mode(0.3, self.p.with_tau(0.0))
        K = luttinger_params(0.1).K
        self.assertAlmostEqual(mode.p_q, math.sinh(0.5 * math.log(K)) ** 2, places=14)

        # Écart de quelques pourcents avec p₀ (ansatz de Bethe)
        self.assertLess(abs(mode.p_q - self.p.p0), 0.1 * self.p.p0)

    def test_asymptotic_agreement(self):
        """Test de p_q ≈ p₀ sinc²(Jqτ_Q) sur une plage de Jqτ_Q"""
        for jqt in [0.5, 2.0, 5.0, 10.0]:
            q = jqt / (self.p.J * self.p.tau_q)
            exact = solve_mode(q, self.p).p_q
            approx = pq_asymptotic(q, self.p)
            self.assertLess(abs(exact - approx), 0.1 * self.p.p0, msg=f"Jqτ_Q={jqt}")

    def test_linearized_airy_solution(self):
        """Test de la solution d'Airy exacte du modèle linéarisé"""
        options = ModeSolverOptions(velocity_model='linearized')

        # |α| = (Jqτ̃)^{2/3} de 0.1 à 50: série, couronne de raccord et asymptotique
        alphas = np.geomspace(0.1, 50.0, 50)
        taus = np.geomspace(1.0, 30.0, 50)
        for alpha, tau_q in zip(alphas, taus):
            p = QuenchProtocol(delta_f=0.1, tau_q=float(tau_q))
            q = float(alpha ** 1.5 / (p.J * tau_q * math.pi / (4.0 * p.delta_f)))
            mode = solve_mode(q, p, options)
            f_minus, f_plus = airy_f_minus(q, p)

            label = f"|α|={alpha:.3g}, τ_Q={tau_q:.3g}"
            self.assertLess(abs(f_minus - mode.f_minus), 1e-6 * abs(mode.f_minus), msg=label)
            self.assertLess(abs(f_plus - mode.f_plus), 1e-6 * abs(mode.f_plus), msg=label)

    def test_airy_asymptotic(self):
        """Test du développement à grand Jqτ̃"""
        p = QuenchProtocol(delta_f=0.1, tau_q=20.0)
        q = 2.0
        exact, _ = airy_f_minus(q, p)
        approx = airy_asymptotic_f_minus(q, p)
        tau_tilde = p.tau_q * math.pi / (4.0 * p.delta_f)
        self.assertLess(abs(exact - approx), 10.0 / (q * tau_tilde) ** 2)

    def test_airy_domain(self):
        """Test du domaine de la solution d'Airy"""
        with self.assertRaises(DomainError):
            airy_f_minus(0.5, QuenchProtocol(delta_f=0.0, tau_q=5.0))

    def test_invalid_inputs(self):
        """Test des entrées invalides du solveur"""
        with self.assertRaises(DomainError):
            solve_mode(0.0, self.p)
        with self.assertRaises(DomainError):
            ModeSolverOptions(method='Euler')

    def test_solve_modes_and_json(self):
        """Test de la résolution groupée et de l'export JSON"""
        modes = solve_modes([0.1, 0.2], self.p)
        self.assertEqual([m.q for m in modes], [0.1, 0.2])
        with tempfile.TemporaryDirectory() as tmp:
            path = save_modes_json(modes, os.path.join(tmp, 'modes.json'))
            records = json.loads(path.read_text(encoding='utf-8'))
        self.assertEqual(len(records), 2)
        self.assertIn('y2_im', records[0])
        self.assertEqual(records[1]['p_q'], modes[1].p_q)

    def test_mode_energies(self):
        """Test de ε⁰ = Jq et ε^τ = v(Δ_f)q"""
        eps0, eps_tau = mode_energies(np.array([0.5, 1.0]), self.p)
        np.testing.assert_allclose(eps0, [0.5, 1.0])
        np.testing.assert_allclose(eps_tau, luttinger_params(0.1).v * np.array([0.5, 1.0]))


class TestLandauZener(unittest.TestCase):
    """Tests du modèle à deux bandes"""

    def test_linear_moment(self):
        """Test de ∫ e^{-πJqτ/2} dq = 2/(πJτ)"""
        p = QuenchProtocol(delta_f=0.1, tau_q=8.0)
        self.assertAlmostEqual(lz_moment(0, 1.0, 1.0, p), 2.0 / (math.pi * 8.0), places=10)

    def test_domain(self):
        """Test des exposants et impulsions invalides"""
        p = QuenchProtocol(delta_f=0.1, tau_q=8.0)
        with self.assertRaises(DomainError):
            pq_landau_zener(0.0, 1.0, 1.0, p)
        with self.assertRaises(DomainError):
            pq_landau_zener(0.5, 2.0, 1.0, p)
        with self.assertRaises(DomainError):
            lz_moment(0, 1.0, 1.0, p.with_tau(0.0))


if __name__ == '__main__':
    unittest.main()
