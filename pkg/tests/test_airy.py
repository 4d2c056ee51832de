"""
Tests unitaires pour les fonctions d'Airy à argument complexe
"""

import unittest
from unittest import mock
import numpy as np
from scipy import special
import sys
import os

# Ajouter le dossier src au path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from airy import airy_functions, airy_scalar
from config import AIRY_CONFIG
from errors import PrecisionLossError


class TestAiry(unittest.TestCase):
    """Comparaison à scipy.special.airy"""

    def setUp(self):
        """Points couvrant la série, l'anneau de raccord et l'asymptotique"""
        self.points = [
            0.0, 0.5 + 0.3j, -2.0 + 1.0j, 1.5 - 3.0j, 4.0 + 2.0j,
            5.0 + 3.0j, -6.5 - 1.0j, 9.0 + 9.0j, -12.0 + 0.2j, 15.0j,
        ]

    def assertClose(self, value, reference):
        tol = 1e-7 * max(abs(reference), 1.0)
        self.assertLessEqual(abs(value - reference), tol, msg=f"{value} != {reference}")

    def test_against_scipy(self):
        """Test de (Ai, Ai', Bi, Bi') en des points complexes"""
        for z in self.points:
            ours = airy_scalar(z)
            reference = special.airy(complex(z))
            for value, ref in zip(ours, reference):
                self.assertClose(value, ref)

    def test_wronskian(self):
        """Test du wronskien Ai·Bi' - Ai'·Bi = 1/π"""
        for z in self.points:
            ai, aip, bi, bip = airy_scalar(z)
            scale = max(1.0, abs(ai * bip), abs(aip * bi))
            self.assertLess(abs(ai * bip - aip * bi - 1.0 / np.pi), 1e-7 * scale)

    def test_vectorized(self):
        """Test de la version vectorisée"""
        z = np.array([[0.5 + 0.3j, 4.0 + 2.0j], [-2.0 + 1.0j, 15.0j]])
        ai, aip, bi, bip = airy_functions(z)

        # Vérifier la forme
        self.assertEqual(ai.shape, (2, 2))
        self.assertClose(bi[1, 1], special.airy(15.0j)[2])

        # Un scalaire rend un tuple de complexes
        scalar = airy_functions(1.0 + 1.0j)
        self.assertIsInstance(scalar[0], complex)

    def test_precision_loss(self):
        """Test du refus d'une précision inatteignable"""
        with self.assertRaises(PrecisionLossError):
            airy_scalar(2.0 + 1.0j, precision=1e-30)

    def test_annulus_from_config(self):
        """Test de la couronne de raccord lue dans AIRY_CONFIG"""
        self.assertLess(AIRY_CONFIG['inner_radius'], AIRY_CONFIG['outer_radius'])
        self.assertClose(airy_scalar(10.0)[0], special.airy(10.0)[0])

        # Série seule en z = 10: annulation catastrophique sur Ai
        with mock.patch.dict(AIRY_CONFIG, {'inner_radius': 20.0, 'outer_radius': 30.0}):
            with self.assertRaises(PrecisionLossError):
                airy_scalar(10.0)


if __name__ == '__main__':
    unittest.main()
