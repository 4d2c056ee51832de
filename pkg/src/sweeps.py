"""
Module de collecte des cumulants le long d'un balayage en durée de trempe τ_Q
"""

import logging
import math
from multiprocessing import Pool
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import SWEEP_CONFIG
from errors import DomainError
from luttinger import QuenchProtocol, luttinger_params
from workstats import (CumulantSet, cfw_ground, cumulant_integrals_ground, cumulants_frame,
                       cumulants_from_cfw, cumulants_thermal, stencil_grid, write_csv)
from xxz_ed import ChainSpec, EdOptions, build_hamiltonian, ground_state, work_distribution

logger = logging.getLogger(__name__)

ANALYTIC_METHODS = ('analytic-integral', 'finite-difference')


@dataclass(frozen=True)
class SweepSpec:
    """Grille de τ_Q: {min, max, points, log-spaced}"""
    tau_min: float
    tau_max: float
    points: int
    log_spaced: bool = True
    include_zero: bool = False

    def __post_init__(self):
        if self.points < 2:
            raise DomainError("Un balayage requiert au moins 2 points")
        if not 0 < self.tau_min < self.tau_max or not math.isfinite(self.tau_max):
            raise DomainError(f"Bornes de balayage invalides: [{self.tau_min}, {self.tau_max}]")

    def values(self) -> np.ndarray:
        if self.log_spaced:
            taus = np.geomspace(self.tau_min, self.tau_max, self.points)
        else:
            taus = np.linspace(self.tau_min, self.tau_max, self.points)
        return np.concatenate([[0.0], taus]) if self.include_zero else taus

    @classmethod
    def from_dict(cls, data: Dict) -> 'SweepSpec':
        return cls(
            tau_min=float(data['min']),
            tau_max=float(data['max']),
            points=int(data['points']),
            log_spaced=bool(data.get('log_spaced', True)),
            include_zero=bool(data.get('include_zero', False)),
        )


def _analytic_point(args: Tuple[QuenchProtocol, int, float, str, int, str]) -> CumulantSet:
    p, N, alpha, method, n_max, convention = args
    if not p.is_ground_state:
        return cumulants_thermal(p, alpha, N, convention=convention)
    if method == 'analytic-integral':
        return cumulant_integrals_ground(p, alpha, N, convention, n_max)
    curve = cfw_ground(stencil_grid(N, p.J), p, N, alpha, convention=convention)
    return cumulants_from_cfw(curve, n_max)


def _ed_point(args: Tuple[ChainSpec, QuenchProtocol, EdOptions, int]) -> CumulantSet:
    spec, p, options, n_max = args
    return work_distribution(spec, p, options).cumulants(n_max)


def adiabatic_references(p: QuenchProtocol, N: int, alpha: float, source: str = 'analytic') -> Dict:
    """
    Valeurs adiabatiques des cumulants fondamentaux: κ₁ = Nμ, κ_{n≥2} = 0
    """
    v_tau = luttinger_params(p.delta_f, p.J).v
    mu = (v_tau - p.J) / (math.pi * alpha ** 2)
    return {(source, 'kappa1'): N * mu, (source, 'kappa2'): 0.0, (source, 'kappa3'): 0.0}


def ed_adiabatic_references(p: QuenchProtocol, N: int, pbc: bool = True) -> Dict:
    """
    Valeurs adiabatiques des cumulants ED: κ₁ = E_g(Δ_f) - E_g(0) dans le secteur, κ_{n≥2} = 0
    """
    if not p.is_ground_state:
        raise DomainError("Références adiabatiques ED définies pour β = ∞ seulement")
    spec = ChainSpec(N, pbc=pbc)
    e_initial, _ = ground_state(build_hamiltonian(spec, 0.0, p.J), spec)
    e_final, _ = ground_state(build_hamiltonian(spec, p.delta_f, p.J), spec)
    return {('ed', 'kappa1'): e_final - e_initial, ('ed', 'kappa2'): 0.0, ('ed', 'kappa3'): 0.0}


def oscillation_period(N: int, J: float = 1.0) -> float:
    """Période des oscillations de taille finie en τ_Q: π/(J q_min), q_min = 2π/N"""
    if N < 2:
        raise DomainError(f"N ≥ 2 requis (reçu {N})")
    return math.pi / (J * 2.0 * math.pi / N)


class SweepCollector:
    """Collecte les cumulants analytiques et de diagonalisation exacte en fonction de τ_Q"""

    def __init__(self, protocol: QuenchProtocol, taus: Sequence[float], N: int,
                 alpha: Optional[float] = None, workers: int = None,
                 convention: str = 'bosonic', ed_options: EdOptions = None):
        """
        Initialise le collecteur

        Args:
            protocol (QuenchProtocol): Protocole de base (τ_Q remplacé point par point)
            taus (Sequence[float]): Durées de trempe
            N (int): Nombre de sites
            alpha (float): Coupure UV des intégrales analytiques
            workers (int): Nombre de processus (1: séquentiel)
        """
        taus = [float(t) for t in taus]
        if not taus:
            raise DomainError("Balayage vide")
        if any(t < 0 or not math.isfinite(t) for t in taus):
            raise DomainError("Les durées τ_Q doivent être finies et ≥ 0")
        self.protocol = protocol
        self.taus = taus
        self.N = N
        self.alpha = alpha
        self.workers = workers or SWEEP_CONFIG['workers']
        self.convention = convention
        self.ed_options = ed_options or EdOptions()
        self.df_sweep = None

    def _map(self, func: Callable, jobs: List) -> List:
        """Exécute les points; l'ordre des résultats suit celui des entrées"""
        if self.workers <= 1 or len(jobs) == 1:
            return [func(job) for job in jobs]
        with Pool(processes=self.workers) as pool:
            return pool.map(func, jobs)

    def collect_analytic(self, method: str = 'analytic-integral', n_max: int = 3) -> pd.DataFrame:
        """
        Cumulants analytiques (intégrales maîtresses ou différences finies de la CFW)

        Returns:
            pd.DataFrame: Colonnes tau_q, kappa1..kappa3, method, alpha, source
        """
        if method not in ANALYTIC_METHODS:
            raise DomainError(f"Méthode analytique inconnue: {method}")
        if self.alpha is None:
            raise DomainError("Une coupure α est requise pour la source analytique")
        logger.info(f"  📐 Cumulants analytiques ({method}) sur {len(self.taus)} points...")

        jobs = [(self.protocol.with_tau(t), self.N, self.alpha, method, n_max, self.convention)
                for t in self.taus]
        try:
            results = self._map(_analytic_point, jobs)
        except Exception as e:
            logger.error(f"❌ Erreur lors du balayage analytique: {str(e)}")
            raise

        logger.info(f"     ✓ {len(results)} points analytiques calculés")
        return cumulants_frame(list(zip(self.taus, results)), 'analytic')

    def collect_ed(self, n_max: int = 3, pbc: bool = True) -> pd.DataFrame:
        """Cumulants des moments de P(W) obtenus par diagonalisation exacte"""
        spec = ChainSpec(self.N, pbc=pbc)
        logger.info(f"  🧮 Diagonalisation exacte N={self.N} sur {len(self.taus)} points...")

        jobs = [(spec, self.protocol.with_tau(t), self.ed_options, n_max) for t in self.taus]
        try:
            results = self._map(_ed_point, jobs)
        except Exception as e:
            logger.error(f"❌ Erreur lors du balayage ED: {str(e)}")
            raise

        logger.info(f"     ✓ {len(results)} points ED calculés")
        return cumulants_frame(list(zip(self.taus, results)), 'ed')

    def collect_all(self, sources: Sequence[str] = ('analytic', 'ed'),
                    method: str = 'analytic-integral') -> pd.DataFrame:
        """
        Collecte toutes les sources demandées, dans l'ordre (source, τ_Q)

        Returns:
            pd.DataFrame: Tableau de balayage complet
        """
        frames = []
        for source in sources:
            if source == 'analytic':
                frames.append(self.collect_analytic(method))
            elif source == 'ed':
                frames.append(self.collect_ed())
            else:
                raise DomainError(f"Source inconnue: {source}")

        self.df_sweep = pd.concat(frames, ignore_index=True)
        return self.df_sweep

    def save_data(self, df: pd.DataFrame, filepath: str):
        """Sauvegarde le tableau de balayage au format CSV"""
        try:
            write_csv(df, filepath)
        except Exception as e:
            logger.error(f"Erreur lors de la sauvegarde: {str(e)}")
            raise

    def get_data_summary(self) -> Dict:
        """
        Retourne un résumé du balayage collecté

        Returns:
            Dict: Nombre de lignes, sources, étendue en τ_Q
        """
        if self.df_sweep is None:
            raise DomainError("Aucune donnée collectée. Exécutez collect_all() d'abord.")
        return {
            'n_rows': len(self.df_sweep),
            'sources': sorted(self.df_sweep['source'].unique().tolist()),
            'tau_range': (float(self.df_sweep['tau_q'].min()), float(self.df_sweep['tau_q'].max())),
            'N': self.N,
            'alpha': self.alpha,
        }
