"""
Module d'analyse des lois d'échelle en durée de trempe τ_Q
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import statsmodels.api as sm

from config import SWEEP_CONFIG
from errors import DomainError

logger = logging.getLogger(__name__)

CUMULANT_COLUMNS = ('kappa1', 'kappa2', 'kappa3')


@dataclass(frozen=True)
class ScalingFit:
    """
    Résultat d'un ajustement en loi de puissance y ∝ τ_Q^θ (× ln τ_Q si log_correction)
    """
    exponent: float
    log_correction: bool
    r_squared: float
    window: Tuple[float, float]
    intercept: float = 0.0
    rss: float = 0.0
    n_points: int = 0
    envelope: bool = False

    def to_dict(self) -> Dict:
        return {
            'exponent': self.exponent,
            'log_correction': self.log_correction,
            'r_squared': self.r_squared,
            'window': list(self.window),
            'intercept': self.intercept,
            'rss': self.rss,
            'n_points': self.n_points,
            'envelope': self.envelope,
        }


@dataclass(frozen=True)
class ScalingTag:
    """Régime asymptotique attendu: 'power', 'log' ou 'saturated'"""
    kind: str
    exponent: float

    @property
    def log_correction(self) -> bool:
        return self.kind == 'log'


def _as_arrays(points) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(points, tuple) and len(points) == 2 and np.ndim(points[0]) == 1:
        taus, values = points
    else:
        pairs = np.asarray(list(points), dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise DomainError("Les points doivent être des couples (tau_q, valeur)")
        taus, values = pairs[:, 0], pairs[:, 1]
    return np.asarray(taus, dtype=float), np.asarray(values, dtype=float)


def fit_scaling(points, detect_log: bool = False) -> ScalingFit:
    """
    Ajuste ln y = c + θ ln τ_Q par moindres carrés ordinaires

    Args:
        points: Couples (tau_q, valeur > 0), ou tuple (taus, valeurs)
        detect_log (bool): Tester aussi ln y = c + θ ln τ_Q + ln ln τ_Q

    Returns:
        ScalingFit: Exposant, présence d'une correction logarithmique, r²
    """
    taus, values = _as_arrays(points)

    if len(taus) < SWEEP_CONFIG['min_points']:
        raise DomainError(f"Au moins {SWEEP_CONFIG['min_points']} points requis (reçu {len(taus)})")
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise DomainError("Les valeurs ajustées doivent être finies et strictement positives")
    if np.any(taus <= 0):
        raise DomainError("Les durées τ_Q ajustées doivent être strictement positives")
    if np.log10(taus.max() / taus.min()) < SWEEP_CONFIG['min_decades']:
        raise DomainError("L'étendue en τ_Q doit couvrir au moins une décade")

    log_tau = np.log(taus)
    X = sm.add_constant(log_tau)
    y = np.log(values)

    model = sm.OLS(y, X).fit()
    log_flag = False

    if detect_log:
        if np.all(taus > 1):
            log_model = sm.OLS(y - np.log(log_tau), X).fit()
            if log_model.ssr < SWEEP_CONFIG['log_model_preference'] * model.ssr:
                model, log_flag = log_model, True
        else:
            logger.warning("⚠️  Modèle logarithmique ignoré: ln ln τ_Q requiert τ_Q > 1")

    r_squared = float(np.clip(np.nan_to_num(model.rsquared, nan=1.0), 0.0, 1.0))
    return ScalingFit(
        exponent=float(model.params[1]),
        log_correction=log_flag,
        r_squared=r_squared,
        window=(float(taus.min()), float(taus.max())),
        intercept=float(model.params[0]),
        rss=float(model.ssr),
        n_points=len(taus),
    )


def theta_exponent(n: int, d: int = 1, z: float = 1.0, a: float = 1.0) -> float:
    """Exposant θ_n = (d + nz)/(2a - z)"""
    if 2 * a - z <= 0:
        raise DomainError(f"2a - z doit être > 0 (a={a}, z={z})")
    return (d + n * z) / (2 * a - z)


def scaling_regime(n: int, d: int = 1, z: float = 1.0, a: float = 1.0) -> ScalingTag:
    """
    Régime de |κ_n - κ_n^a| à grand τ_Q

    θ_n < 2: τ_Q^{-θ_n}; θ_n = 2: τ_Q^{-2} ln τ_Q; θ_n > 2: τ_Q^{-2}.
    """
    theta = theta_exponent(n, d, z, a)
    if np.isclose(theta, 2.0):
        return ScalingTag('log', -2.0)
    if theta < 2.0:
        return ScalingTag('power', -theta)
    return ScalingTag('saturated', -2.0)


def renormalize(values: Sequence[float], reference: float) -> np.ndarray:
    """|κ(τ_Q) - κ_ref|"""
    return np.abs(np.asarray(values, dtype=float) - reference)


def plateau_estimate(taus: Sequence[float], values: Sequence[float]) -> float:
    """Moyenne sur la plus grande décade de τ_Q échantillonnée"""
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = taus >= taus.max() / 10.0
    return float(values[mask].mean())


def upper_envelope(taus: Sequence[float], values: Sequence[float],
                   period: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Enveloppe supérieure: maximum de |valeur| sur des fenêtres consécutives de largeur period
    """
    taus = np.asarray(taus, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if period <= 0:
        raise DomainError("La période de la fenêtre doit être > 0")

    order = np.argsort(taus)
    taus, values = taus[order], values[order]
    windows = np.floor((taus - taus[0]) / period).astype(int)

    env_taus, env_values = [], []
    for window in np.unique(windows):
        idx = np.flatnonzero(windows == window)
        best = idx[np.argmax(values[idx])]
        env_taus.append(taus[best])
        env_values.append(values[best])
    return np.array(env_taus), np.array(env_values)


def oscillation_amplitude(values: Sequence[float]) -> float:
    """Demi-amplitude crête à crête"""
    values = np.asarray(values, dtype=float)
    return 0.5 * float(values.max() - values.min())


class ScalingAnalyzer:
    """Classe pour ajuster les lois d'échelle d'un tableau de balayage"""

    def __init__(self, data: pd.DataFrame, branch: str = 'slow',
                 references: Optional[Dict[Tuple[str, str], float]] = None,
                 envelope_periods: Optional[Dict[str, float]] = None):
        """
        Initialise l'analyseur

        Args:
            data (pd.DataFrame): Colonnes tau_q, kappa1..kappa3, method, alpha, source
            branch (str): 'fast' (référence τ_Q = 0) ou 'slow' (référence adiabatique)
            references (dict): Valeurs de référence {(source, colonne): valeur}
            envelope_periods (dict): {source: période} des sources oscillantes de la branche lente,
                ajustées sur leur enveloppe supérieure
        """
        if branch not in ('fast', 'slow'):
            raise DomainError(f"Branche inconnue: {branch}")
        envelope_periods = dict(envelope_periods or {})
        if envelope_periods and branch != 'slow':
            raise DomainError("L'enveloppe supérieure ne s'applique qu'à la branche lente")
        if any(not period > 0 for period in envelope_periods.values()):
            raise DomainError("Les périodes d'oscillation doivent être > 0")
        self.data = data.dropna(subset=['tau_q'])
        self.branch = branch
        self.references = dict(references or {})
        self.envelope_periods = envelope_periods

    def _reference(self, source: str, column: str, frame: pd.DataFrame) -> float:
        if (source, column) in self.references:
            return self.references[(source, column)]
        if self.branch == 'fast':
            sudden = frame.loc[frame['tau_q'] == 0, column]
            if sudden.empty:
                raise DomainError(f"Aucune ligne τ_Q = 0 pour la source {source}")
            return float(sudden.iloc[0])
        positive = frame[frame['tau_q'] > 0]
        return plateau_estimate(positive['tau_q'], positive[column])

    def renormalized(self) -> pd.DataFrame:
        """
        Cumulants renormalisés |κ_n - κ_ref| (lignes τ_Q = 0 exclues)

        Returns:
            pd.DataFrame: Colonnes source, tau_q, kappa1..kappa3
        """
        frames = []
        for source, frame in self.data.groupby('source', sort=True):
            out = frame.loc[frame['tau_q'] > 0, ['tau_q']].copy()
            out['source'] = source
            for column in CUMULANT_COLUMNS:
                if column not in frame or frame[column].isna().all():
                    continue
                reference = self._reference(source, column, frame)
                out[column] = renormalize(frame.loc[frame['tau_q'] > 0, column], reference)
            frames.append(out)
        if not frames:
            raise DomainError("Tableau de balayage vide")
        return pd.concat(frames, ignore_index=True)

    def fit_all(self, detect_log_for: Iterable[str] = ('kappa1',)) -> Dict[str, ScalingFit]:
        """
        Ajuste chaque couple (source, cumulant)

        Returns:
            Dict: {"source:kappaN": ScalingFit}
        """
        detect_log_for = set(detect_log_for) if self.branch == 'slow' else set()
        fits = {}
        renorm = self.renormalized()

        for source, frame in renorm.groupby('source', sort=True):
            for column in CUMULANT_COLUMNS:
                if column not in frame:
                    continue
                valid = frame[['tau_q', column]].dropna()
                valid = valid[valid[column] > 0]
                if len(valid) < len(frame):
                    logger.warning(f"⚠️  {source}:{column}: {len(frame) - len(valid)} point(s) nul(s) ou manquant(s) écarté(s)")
                taus, values = valid['tau_q'].to_numpy(), valid[column].to_numpy()

                period = self.envelope_periods.get(source)
                if period is not None:
                    taus, values = upper_envelope(taus, values, period)
                    logger.info(f"   ✓ {source}:{column}: enveloppe supérieure sur {len(taus)} fenêtre(s) de {period:.4g}")

                fit = fit_scaling((taus, values), detect_log=column in detect_log_for)
                fits[f'{source}:{column}'] = replace(fit, envelope=period is not None)
                logger.info(f"   ✓ {source}:{column}: exposant {fit.exponent:.4f}")
        return fits

    def summary_frame(self, fits: Dict[str, ScalingFit]) -> pd.DataFrame:
        """Tableau récapitulatif des ajustements"""
        rows = []
        for key, fit in fits.items():
            source, column = key.split(':')
            rows.append({
                'source': source,
                'cumulant': column,
                'exponent': fit.exponent,
                'log_correction': fit.log_correction,
                'r_squared': fit.r_squared,
                'tau_min': fit.window[0],
                'tau_max': fit.window[1],
                'envelope': fit.envelope,
            })
        return pd.DataFrame(rows)
