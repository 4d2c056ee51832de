"""
Module des statistiques de travail: fonction caractéristique (CFW), cumulants, intégrales maîtresses

Conventions:
    - Chaque paire de modes (q, -q) contribue iu(ε_q^τ - ε_q⁰) (énergie fondamentale E_g)
      plus ln[g_q(u)/g_q(0)], si bien que la phase adiabatique totale vaut 2iuE_g = iuNμ.
    - convention='bosonic': Q_q = 1 + 2p_q (trace bosonique à deux modes);
      convention='printed': Q_q = 1 - 2p_q.
    - mode_set='discrete': q = 2πn/N, n = 1…N/2, sans régulateur;
      mode_set='continuum': N∫dq/2π avec e^{-αq}.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate
from scipy.special import binom, factorial, gamma

from config import INTEGRAL_CONFIG, OUTPUT_CONFIG, QUADRATURE_CONFIG, STENCIL_CONFIG
from errors import (DomainError, ImaginaryResidueError, PhaseUnwrapError, PoleProximityError,
                    QuadratureError)
from luttinger import ModeSolverOptions, QuenchProtocol, luttinger_params, pq_asymptotic, solve_mode
from scaling_analysis import ScalingFit, ScalingTag, fit_scaling

logger = logging.getLogger(__name__)

CURVE_SOURCES = ('analytic', 'ed', 'oracle')
CUMULANT_METHODS = ('analytic-integral', 'finite-difference', 'ttm-moments')
CONVENTIONS = {'bosonic': 1.0, 'printed': -1.0}
MODE_SETS = ('discrete', 'continuum')
_EPS = float(np.finfo(float).eps)

ModeSource = Callable[[np.ndarray, QuenchProtocol], np.ndarray]

# Coefficients des cumulants de -ln[1 - s p (e^x - 1)] en puissances de p
_CUMULANT_POLYNOMIALS = {
    1: {1: ('s', 1.0)},
    2: {1: ('s', 1.0), 2: ('1', 1.0)},
    3: {1: ('s', 1.0), 2: ('1', 3.0), 3: ('s', 2.0)},
    4: {1: ('s', 1.0), 2: ('1', 7.0), 3: ('s', 12.0), 4: ('1', 6.0)},
}

__all__ = [
    'CfwCurve', 'CumulantSet', 'MasterIntegral', 'ScalingFit',
    'asymptotic_source', 'ode_source', 'occupation_sign', 'q_weight', 'discrete_momenta',
    'pair_log_cfw', 'log_cfw', 'thermal_log_cfw', 'cfw_ground', 'cfw_thermal', 'partition_log_ratio',
    'stencil_grid', 'cumulants_from_cfw', 'sinc_power_integral', 'master_integral',
    'cumulant_integrals_ground', 'cumulants_thermal', 'fit_scaling', 'cumulants_frame', 'write_csv',
]


@dataclass(frozen=True)
class CfwCurve:
    """
    Fonction caractéristique du travail échantillonnée

    Attributes:
        u_grid (np.ndarray): Grille croissante de u (en 1/J)
        values (np.ndarray): G(u) complexes
        source (str): 'analytic', 'ed' ou 'oracle'
        meta (dict): Protocole, N, β, coupure α
    """
    u_grid: np.ndarray
    values: np.ndarray
    source: str
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        u = np.asarray(self.u_grid, dtype=float)
        g = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, 'u_grid', u)
        object.__setattr__(self, 'values', g)

        if u.ndim != 1 or u.shape != g.shape:
            raise DomainError("u_grid et values doivent être des vecteurs de même longueur")
        if np.any(np.diff(u) <= 0):
            raise DomainError("La grille u doit être strictement croissante")
        if self.source not in CURVE_SOURCES:
            raise DomainError(f"Source inconnue: {self.source}")
        zero = np.flatnonzero(u == 0.0)
        if zero.size and abs(g[zero[0]] - 1.0) > 1e-12:
            raise DomainError(f"G(0) = {g[zero[0]]} ≠ 1")

    @property
    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.u_grid, -self.u_grid[::-1], rtol=0.0, atol=1e-15))

    def hermitian_defect(self) -> float:
        """max |G(-u) - G(u)*| sur une grille symétrique"""
        if not self.is_symmetric:
            raise DomainError("Grille non symétrique")
        return float(np.max(np.abs(self.values[::-1] - np.conj(self.values))))

    def bound_defect(self) -> float:
        """max(|G(u)| - 1, 0)"""
        return float(max(np.max(np.abs(self.values)) - 1.0, 0.0))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'u': self.u_grid, 're_G': self.values.real, 'im_G': self.values.imag})

    def to_csv(self, path: Union[str, Path]) -> Path:
        return write_csv(self.to_frame(), path)


@dataclass(frozen=True)
class CumulantSet:
    """Cumulants κ₁…κ_n avec leur méthode d'obtention"""
    kappas: Tuple[float, ...]
    method: str
    regulator: Optional[float] = None
    n_max: int = 0
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        kappas = tuple(float(k) for k in self.kappas)
        object.__setattr__(self, 'kappas', kappas)
        if self.n_max == 0:
            object.__setattr__(self, 'n_max', len(kappas))
        if self.method not in CUMULANT_METHODS:
            raise DomainError(f"Méthode inconnue: {self.method}")
        if self.n_max != len(kappas) or not 1 <= self.n_max <= 4:
            raise DomainError(f"Ordre incohérent: n_max={self.n_max}, {len(kappas)} cumulants")
        if self.method == 'ttm-moments' and self.n_max >= 2:
            scale = max(1.0, kappas[0] ** 2)
            if kappas[1] < -1e-12 * scale:
                raise DomainError(f"Variance négative: κ₂ = {kappas[1]}")

    def kappa(self, n: int) -> float:
        return self.kappas[n - 1]

    def to_row(self) -> Dict[str, Any]:
        row = {f'kappa{n}': (self.kappas[n - 1] if n <= self.n_max else np.nan) for n in (1, 2, 3)}
        row['method'] = self.method
        row['alpha'] = np.nan if self.regulator is None else self.regulator
        return row


@dataclass(frozen=True)
class MasterIntegral:
    """
    Valeur de ∫₀^∞ dq (ε_q^τ)ⁿ p_q^m

    Attributes:
        case (str): 'cutoff' (n-2m > -1), 'logarithmic' (n-2m = -1), 'convergent' (n-2m < -1), 'sudden'
        tag (ScalingTag): Comportement asymptotique en τ_Q (None pour τ_Q = 0)
        method (str): 'closed-form' ou 'quadrature'
        regulated (bool): Régulateur e^{-αq} inclus
    """
    value: float
    n: int
    m: int
    case: str
    tag: Optional[ScalingTag]
    method: str
    regulated: bool


def asymptotic_source(q: np.ndarray, p: QuenchProtocol) -> np.ndarray:
    """p_q = p₀ sinc²(Jqτ_Q)"""
    return np.atleast_1d(pq_asymptotic(q, p))


def ode_source(options: ModeSolverOptions = None) -> ModeSource:
    """p_q obtenu en intégrant l'équation de mode pour chaque q"""
    def source(q: np.ndarray, p: QuenchProtocol) -> np.ndarray:
        return np.array([solve_mode(float(x), p, options).p_q for x in np.atleast_1d(q)])
    source.__name__ = 'ode_source'
    return source


def occupation_sign(convention: str) -> float:
    if convention not in CONVENTIONS:
        raise DomainError(f"Convention inconnue: {convention} (choix: {sorted(CONVENTIONS)})")
    return CONVENTIONS[convention]


def q_weight(p_q, convention: str = 'bosonic'):
    """Q_q = 1 + 2s p_q"""
    return 1.0 + 2.0 * occupation_sign(convention) * np.asarray(p_q)


def discrete_momenta(N: int) -> np.ndarray:
    """q = 2πn/N, n = 1…N/2"""
    return 2.0 * math.pi * np.arange(1, N // 2 + 1) / N


def pair_log_cfw(eps0, eps_tau, p_q, u, beta: float = math.inf,
                 convention: str = 'bosonic', check_poles: bool = True, J: float = 1.0):
    """
    Contribution d'une paire de modes à ln G(u): iu(ε^τ - ε⁰) + ln[g_q(u)/g_q(0)]

    Avec φ = u(ε^τ - ε⁰), x = e^{-βε⁰}:
        g_q(u)/g_q(0) = e^{iφ} T(0)/T(u),
        T(u) = (1 - x e^{iφ})² - s p_q (e^{2iuε^τ} - 1)(1 - x² e^{-2iuε⁰}),
    forme sans débordement du dénominateur de g_q pour βε⁰ grand.
    Les arguments sont diffusés (broadcast) numpy; u peut être complexe.
    J ne sert qu'à rapporter q = ε⁰/J en cas de pôle.
    """
    sign = occupation_sign(convention)
    u = np.asarray(u, dtype=complex)
    eps0 = np.asarray(eps0, dtype=float)
    eps_tau = np.asarray(eps_tau, dtype=float)
    p_q = np.asarray(p_q, dtype=float)

    phi = u * (eps_tau - eps0)
    excitation = sign * p_q * np.expm1(2j * u * eps_tau)

    if math.isinf(beta):
        return 2j * phi - np.log1p(-excitation)

    b_eps = beta * eps0
    t_zero = np.expm1(-b_eps) ** 2
    t_u = np.expm1(-b_eps + 1j * phi) ** 2 + excitation * np.expm1(-2.0 * b_eps - 2j * u * eps0)

    if check_poles and np.all(u.imag == 0):
        # |dénominateur de g_q| = |T(u)| e^{βε⁰}/2
        log_denominator = np.log(np.abs(t_u) + 1e-300) + b_eps - math.log(2.0)
        bad = log_denominator < math.log(QUADRATURE_CONFIG['pole_tol'])
        if np.any(bad):
            idx = np.unravel_index(np.argmax(bad), bad.shape)
            q_bad = float(np.broadcast_to(eps0, bad.shape)[idx]) / J
            u_bad = complex(np.broadcast_to(u, bad.shape)[idx])
            raise PoleProximityError(q_bad, u_bad, float(np.exp(log_denominator[idx])))

    return 2j * phi + np.log(t_zero) - np.log(t_u)


def _quadrature_span(p: QuenchProtocol, alpha: float) -> Tuple[float, Optional[np.ndarray]]:
    scales = [1.0 / alpha]
    if p.tau_q > 0:
        scales.append(1.0 / (p.J * p.tau_q))
    q_max = QUADRATURE_CONFIG['span_factor'] * max(scales)

    breaks = None
    if p.tau_q > 0:
        period = math.pi / (p.J * p.tau_q)
        count = int(min(QUADRATURE_CONFIG['max_breakpoints'], q_max / period))
        if count > 1:
            breaks = np.linspace(0.0, q_max, count + 1)[1:-1]
    return q_max, breaks


def _integrate_modes(vector_integrand: Callable[[float], np.ndarray], p: QuenchProtocol,
                     alpha: float, label: str) -> np.ndarray:
    """
    ∫₀^{Q_max} dq f(q) e^{-αq} pour une intégrande vectorielle réelle, avec borne de queue
    """
    q_max, breaks = _quadrature_span(p, alpha)

    def regulated(q):
        return vector_integrand(q) * math.exp(-alpha * q)

    result, error, info = integrate.quad_vec(
        regulated, 0.0, q_max,
        epsabs=QUADRATURE_CONFIG['epsabs'], epsrel=QUADRATURE_CONFIG['epsrel'],
        limit=QUADRATURE_CONFIG['limit'], points=breaks, full_output=True,
    )
    if not info.success:
        raise QuadratureError(f"Quadrature non convergée ({label}): erreur estimée {error:.2e}")

    # Borne de queue: décroissance exponentielle au-delà de Q_max
    edge = np.abs(vector_integrand(q_max))
    tail = float(np.max(edge)) * math.exp(-alpha * q_max) * (2.0 / alpha)
    scale = max(1.0, float(np.max(np.abs(result))))
    if tail > QUADRATURE_CONFIG['tail_tol'] * scale:
        raise QuadratureError(f"Queue d'intégrale trop grande ({label}): {tail:.2e} au-delà de Q_max={q_max:.4g}")
    return result


def _validate_chain(N: int, alpha: Optional[float], mode_set: str):
    if mode_set not in MODE_SETS:
        raise DomainError(f"Ensemble de modes inconnu: {mode_set} (choix: {MODE_SETS})")
    if N < 2 or N % 2:
        raise DomainError(f"N doit être pair et ≥ 2 (reçu {N})")
    if mode_set == 'continuum' and not (alpha is not None and alpha > 0):
        raise DomainError("Une coupure α > 0 est requise pour l'ensemble continu")


def log_cfw(u, p: QuenchProtocol, N: int, alpha: Optional[float] = None,
            q_source: ModeSource = None, mode_set: str = 'continuum',
            convention: str = 'bosonic') -> np.ndarray:
    """
    ln G(u) pour un protocole fondamental (β = ∞) ou thermique; u réel ou complexe

    Returns:
        np.ndarray: ln G aux points u
    """
    _validate_chain(N, alpha, mode_set)
    source = q_source or asymptotic_source
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    v_tau = luttinger_params(p.delta_f, p.J).v

    if mode_set == 'discrete':
        q = discrete_momenta(N)
        p_q = source(q, p)
        terms = pair_log_cfw(p.J * q[:, None], v_tau * q[:, None], p_q[:, None], u[None, :],
                             p.beta, convention, J=p.J)
        return terms.sum(axis=0)

    n_u = len(u)

    def integrand(q):
        p_q = source(np.array([q]), p)[0]
        value = pair_log_cfw(p.J * q, v_tau * q, p_q, u, p.beta, convention, J=p.J)
        return np.concatenate([value.real, value.imag])

    total = _integrate_modes(integrand, p, alpha, 'ln G')
    return N / (2.0 * math.pi) * (total[:n_u] + 1j * total[n_u:])


def thermal_log_cfw(u, p: QuenchProtocol, N: int, alpha: Optional[float] = None,
                    q_source: ModeSource = None, mode_set: str = 'discrete',
                    convention: str = 'bosonic') -> np.ndarray:
    """ln G(u) thermique pour u complexe; en u = iβ on retrouve ln(Z_τ/Z₀)"""
    if p.is_ground_state or p.beta <= 0:
        raise DomainError("thermal_log_cfw requiert 0 < β < ∞")
    return log_cfw(u, p, N, alpha, q_source, mode_set, convention)


def _curve(u_grid, p, N, alpha, q_source, mode_set, convention) -> CfwCurve:
    u = np.asarray(u_grid, dtype=float)
    if u.ndim != 1 or np.any(np.diff(u) <= 0):
        raise DomainError("La grille u doit être un vecteur strictement croissant")
    values = np.exp(log_cfw(u, p, N, alpha, q_source, mode_set, convention))
    values[u == 0.0] = 1.0
    meta = {
        'protocol': p.to_dict(), 'N': N, 'alpha': alpha, 'mode_set': mode_set,
        'convention': convention, 'q_source': getattr(q_source, '__name__', 'asymptotic_source'),
    }
    return CfwCurve(u_grid=u, values=values, source='analytic', meta=meta)


def cfw_ground(u_grid, p: QuenchProtocol, N: int, alpha: Optional[float] = None,
               q_source: ModeSource = None, mode_set: str = 'continuum',
               convention: str = 'bosonic') -> CfwCurve:
    """
    CFW d'une trempe depuis l'état fondamental

    ln G(u) = iuNμ - N∫₀^∞ dq/2π ln[1 - s p_q(e^{2iuε_q^τ} - 1)] e^{-αq}

    Args:
        u_grid: Grille croissante de u
        p (QuenchProtocol): Protocole avec β = ∞
        N (int): Nombre de sites (pair)
        alpha (float): Coupure UV (ensemble continu)
        q_source: Fournisseur de p_q (défaut: p₀ sinc²)
        mode_set (str): 'continuum' ou 'discrete'
        convention (str): 'bosonic' ou 'printed'

    Returns:
        CfwCurve: Courbe analytique
    """
    if not p.is_ground_state:
        raise DomainError("cfw_ground requiert β = ∞ (utiliser cfw_thermal)")
    logger.debug(f"CFW fondamentale: Δ_f={p.delta_f}, τ_Q={p.tau_q}, N={N}, {mode_set}")
    return _curve(u_grid, p, N, alpha, q_source, mode_set, convention)


def cfw_thermal(u_grid, p: QuenchProtocol, N: int, alpha: Optional[float] = None,
                q_source: ModeSource = None, mode_set: str = 'discrete',
                convention: str = 'bosonic') -> CfwCurve:
    """
    CFW depuis un état thermique: G(u) = e^{iuE_g} Π_{q>0} g_q(u)/g_q(0)

    Les pôles |dénominateur de g_q| < 1e-12 lèvent PoleProximityError.
    """
    if p.is_ground_state or p.beta <= 0:
        raise DomainError("cfw_thermal requiert 0 < β < ∞")
    logger.debug(f"CFW thermique: β={p.beta}, Δ_f={p.delta_f}, τ_Q={p.tau_q}, N={N}, {mode_set}")
    return _curve(u_grid, p, N, alpha, q_source, mode_set, convention)


def partition_log_ratio(p: QuenchProtocol, N: int, alpha: Optional[float] = None,
                        mode_set: str = 'discrete') -> float:
    """
    ln(Z_τ/Z₀) pour H(t) = E_g(t) + ½dᵀΛd sur le même ensemble de modes

    Par paire: -2βΔε + 2 ln[(1 - e^{-βε⁰})/(1 - e^{-βε^τ})].
    """
    if p.is_ground_state or p.beta <= 0:
        raise DomainError("Fonction de partition définie pour 0 < β < ∞")
    _validate_chain(N, alpha, mode_set)
    v_tau = luttinger_params(p.delta_f, p.J).v

    def per_pair(q):
        eps0, eps_tau = p.J * q, v_tau * q
        return (-2.0 * p.beta * (eps_tau - eps0)
                + 2.0 * (np.log(-np.expm1(-p.beta * eps0)) - np.log(-np.expm1(-p.beta * eps_tau))))

    if mode_set == 'discrete':
        return float(np.sum(per_pair(discrete_momenta(N))))

    total = _integrate_modes(lambda q: np.atleast_1d(per_pair(q)), p, alpha, 'ln Z')
    return float(N / (2.0 * math.pi) * total[0])


def stencil_grid(N: int, J: float = 1.0, half_width: int = None) -> np.ndarray:
    """
    Grille symétrique pour les différences finies: pas h/2 avec h = 0.02/(N·J)

    Contient le stencil central de pas h et celui de pas h/2 (extrapolation de Richardson).
    """
    half_width = half_width or STENCIL_CONFIG['half_width']
    h = STENCIL_CONFIG['h_factor'] / (N * J)
    return 0.5 * h * np.arange(-2 * half_width, 2 * half_width + 1)


def _central_weights(order: int, half_width: int) -> np.ndarray:
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    vandermonde = np.vander(offsets, increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[order] = math.factorial(order)
    return np.linalg.solve(vandermonde, rhs)


def _unwrapped_log(u: np.ndarray, g: np.ndarray, zero: int) -> np.ndarray:
    """ln G avec phase accumulée par continuité depuis u = 0 vers l'extérieur"""
    limit = STENCIL_CONFIG['unwrap_limit'] * math.pi
    phase = np.empty(len(u))
    for side in (slice(zero, None), slice(zero, None, -1) if zero > 0 else slice(zero, zero + 1)):
        angles = np.angle(g[side])
        jumps = np.angle(g[side][1:] / g[side][:-1])
        if np.any(np.abs(jumps) > limit):
            raise PhaseUnwrapError("Saut de phase ambigu entre échantillons adjacents: grille trop grossière")
        phase[side] = np.unwrap(angles)
    return np.log(np.abs(g)) + 1j * phase


def cumulants_from_cfw(curve: CfwCurve, n_max: int = 3) -> CumulantSet:
    """
    κ_n = i^{-n} dⁿ ln G/duⁿ en u = 0 par différences finies centrées

    Stencil à 9 points; si la grille contient deux pas emboîtés (h et h/2),
    une extrapolation de Richardson est appliquée.

    Args:
        curve (CfwCurve): Courbe contenant un stencil symétrique autour de u = 0
        n_max (int): Ordre maximal (≤ 4)

    Returns:
        CumulantSet: méthode 'finite-difference'
    """
    if not 1 <= n_max <= 4:
        raise DomainError("n_max doit être compris entre 1 et 4")
    m = STENCIL_CONFIG['half_width']
    u, g = curve.u_grid, curve.values
    zero_idx = np.flatnonzero(u == 0.0)
    if not zero_idx.size:
        raise DomainError("La grille doit contenir u = 0")
    zero = int(zero_idx[0])

    available = min(zero, len(u) - 1 - zero)
    if available < m:
        raise DomainError(f"Stencil symétrique de {2 * m + 1} points introuvable autour de u = 0")
    spacing = u[zero + 1] - u[zero]

    def uniform(reach):
        offsets = u[zero - reach: zero + reach + 1] - u[zero]
        return np.allclose(offsets, spacing * np.arange(-reach, reach + 1), rtol=1e-9, atol=0.0)

    if not uniform(m):
        raise DomainError("Le stencil autour de u = 0 doit être uniforme")
    richardson = available >= 2 * m and uniform(2 * m)

    log_g = _unwrapped_log(u, g, zero)

    def derivative(order, stride):
        """Dérivée centrée et borne de son erreur d'arrondi"""
        weights = _central_weights(order, m)
        samples = log_g[zero - stride * m: zero + stride * m + 1: stride]
        step = (stride * spacing) ** order
        rounding = STENCIL_CONFIG['rounding_factor'] * _EPS * np.dot(np.abs(weights), 1.0 + np.abs(samples))
        return np.dot(weights, samples) / step, rounding / step

    kappas = []
    for order in range(1, n_max + 1):
        fine, noise = derivative(order, 1)
        if richardson:
            accuracy = 2 * (m - (order - 1) // 2)
            coarse, coarse_noise = derivative(order, 2)
            fine = (2 ** accuracy * fine - coarse) / (2 ** accuracy - 1)
            noise = (2 ** accuracy * noise + coarse_noise) / (2 ** accuracy - 1)
        value = fine / (1j ** order)
        if abs(value.imag) > STENCIL_CONFIG['imag_tol'] * abs(value.real) + noise:
            logger.error(f"❌ κ{order}: résidu imaginaire {value.imag:.3e} (partie réelle {value.real:.3e})")
            raise ImaginaryResidueError(
                f"κ{order} non réel: résidu {value.imag:.3e} au-delà du bruit d'arrondi {noise:.1e}"
            )
        kappas.append(value.real)

    return CumulantSet(kappas=tuple(kappas), method='finite-difference',
                       regulator=curve.meta.get('alpha'), meta=dict(curve.meta, source=curve.source))


def sinc_power_integral(n: int, m: int, a: float = 0.0) -> float:
    """
    ∫₀^∞ dθ θ^{n-2m} sin^{2m}θ e^{-aθ} sous forme fermée

    Développement sin^{2m}θ = 2^{-2m}[C(2m,m) + Σ_k c_k cos(b_k θ)],
    c_k = 2(-1)^{m+k}C(2m,k), b_k = 2(m-k). Pour n-2m ≥ -1 le régulateur a > 0
    est requis; pour n-2m < -1 l'intégrale converge et a est ignoré.
    """
    l = n - 2 * m
    ks = np.arange(m)
    b = 2.0 * (m - ks)
    c = 2.0 * (-1.0) ** (m + ks) * binom(2 * m, ks)
    scale = 4.0 ** (-m)

    if l >= 0:
        if not a > 0:
            raise DomainError(f"Régulateur a > 0 requis pour n-2m = {l} ≥ 0")
        power = -(l + 1)
        return float(scale * gamma(l + 1) * (binom(2 * m, m) * a ** power
                                             + np.sum(c * np.real((a - 1j * b) ** power))))
    if l == -1:
        if not a > 0:
            raise DomainError("Régulateur a > 0 requis pour n-2m = -1")
        return float(-0.5 * scale * np.sum(c * np.log1p((b / a) ** 2)))

    order = -l
    if order % 2 == 0:
        return float(scale * np.sum(c * math.pi * b ** (order - 1))
                     / (2.0 * factorial(order - 1) * (-1.0) ** (order // 2)))
    residue = (-1.0) ** ((order - 1) // 2) / factorial(order - 1)
    return float(-scale * residue * np.sum(c * b ** (order - 1) * np.log(b)))


def _sinc_power_quadrature(n: int, m: int, a: float) -> float:
    """
    S(n, m, a) par quadrature adaptative

    Pour n-2m < -1, a est ignoré comme dans la forme fermée: l'intégrale est coupée à
    θ_max = convergent_span·π et la queue est remplacée par sa moyenne C(2m,m)4^{-m} θ^{n-2m}.
    """
    l = n - 2 * m
    convergent = l < -1
    if convergent:
        theta_max = INTEGRAL_CONFIG['convergent_span'] * math.pi
        a = 0.0
    else:
        theta_max = INTEGRAL_CONFIG['quadrature_span'] / a
    count = int(min(QUADRATURE_CONFIG['max_breakpoints'], theta_max / math.pi))
    breaks = np.linspace(0.0, theta_max, count + 1)[1:-1] if count > 1 else None

    def integrand(theta):
        if theta == 0.0:
            return 1.0 if n == 0 else 0.0
        return theta ** n * (math.sin(theta) / theta) ** (2 * m) * math.exp(-a * theta)

    value, error, info = integrate.quad_vec(integrand, 0.0, theta_max, epsabs=QUADRATURE_CONFIG['epsabs'],
                                            epsrel=QUADRATURE_CONFIG['epsrel'],
                                            limit=QUADRATURE_CONFIG['limit'], points=breaks, full_output=True)
    if not info.success:
        raise QuadratureError(f"Intégrale maîtresse (n={n}, m={m}) non convergée: {error:.2e}")
    if convergent:
        value += binom(2 * m, m) * 4.0 ** (-m) * theta_max ** (l + 1) / (-l - 1)
    return float(value)


def master_integral(n: int, m: int, p: QuenchProtocol, alpha: float) -> MasterIntegral:
    """
    ∫₀^∞ dq (ε_q^τ)ⁿ p_q^m avec p_q = p₀ sinc²(Jqτ_Q)

    Avec θ = Jτ_Q q et a = α/(Jτ_Q): valeur = (v^τ)ⁿ p₀^m (Jτ_Q)^{-(n+1)} S(n, m, a).
    Cas k = n-2m: k > -1 régularisé (τ_Q^{-2m}), k = -1 logarithmique
    (τ_Q^{-2m} ln τ_Q), k < -1 convergent (τ_Q^{-(n+1)}).
    """
    if n < 0 or m < 1 or int(n) != n or int(m) != m:
        raise DomainError(f"(n, m) invalides: n ≥ 0 et m ≥ 1 entiers requis (reçu {n}, {m})")
    if not alpha > 0:
        raise DomainError("La coupure α doit être > 0")
    n, m = int(n), int(m)
    v_tau = luttinger_params(p.delta_f, p.J).v
    p0 = p.p0

    if p.tau_q == 0:
        value = v_tau ** n * p0 ** m * math.factorial(n) / alpha ** (n + 1)
        return MasterIntegral(value, n, m, 'sudden', None, 'closed-form', True)

    l = n - 2 * m
    jt = p.J * p.tau_q
    a = alpha / jt
    prefactor = v_tau ** n * p0 ** m / jt ** (n + 1)

    if l > -1:
        case, tag, regulated = 'cutoff', ScalingTag('power', -2.0 * m), True
    elif l == -1:
        case, tag, regulated = 'logarithmic', ScalingTag('log', -2.0 * m), True
    else:
        case, tag, regulated = 'convergent', ScalingTag('power', -(n + 1.0)), False

    if m > INTEGRAL_CONFIG['max_closed_form_m']:
        logger.warning(f"⚠️  Intégrale maîtresse (n={n}, m={m}): quadrature adaptative (forme fermée instable)")
        return MasterIntegral(prefactor * _sinc_power_quadrature(n, m, a), n, m, case, tag, 'quadrature', regulated)

    return MasterIntegral(prefactor * sinc_power_integral(n, m, a), n, m, case, tag, 'closed-form', regulated)


def _cumulant_coefficients(order: int, sign: float) -> Dict[int, float]:
    return {power: (sign if kind == 's' else 1.0) * weight
            for power, (kind, weight) in _CUMULANT_POLYNOMIALS[order].items()}


def cumulant_integrals_ground(p: QuenchProtocol, alpha: float, N: int,
                              convention: str = 'bosonic', n_max: int = 3) -> CumulantSet:
    """
    Cumulants fondamentaux à partir des intégrales maîtresses

    κ₁ = N[μ + (s/π)∫dq ε^τ p_q], κ_n = (2^{n-1}N/π) Σ_j c_{n,j} ∫dq (ε^τ)ⁿ p_q^j,
    où les c_{n,j} sont les cumulants de -ln[1 - s p(e^x - 1)].
    """
    if not p.is_ground_state:
        raise DomainError("cumulant_integrals_ground requiert β = ∞")
    if not 1 <= n_max <= 4:
        raise DomainError("n_max doit être compris entre 1 et 4")
    if not alpha > 0:
        raise DomainError("La coupure α doit être > 0")
    sign = occupation_sign(convention)
    v_tau = luttinger_params(p.delta_f, p.J).v
    mu = (v_tau - p.J) / (math.pi * alpha ** 2)

    kappas = []
    for order in range(1, n_max + 1):
        total = sum(weight * master_integral(order, power, p, alpha).value
                    for power, weight in _cumulant_coefficients(order, sign).items())
        kappa = 2.0 ** (order - 1) * N / math.pi * total
        if order == 1:
            kappa += N * mu
        kappas.append(kappa)

    return CumulantSet(kappas=tuple(kappas), method='analytic-integral', regulator=alpha,
                       meta={'protocol': p.to_dict(), 'N': N, 'convention': convention})


def _thermal_pair_cumulants(eps0, eps_tau, p_q, beta, sign, subtract_adiabatic):
    """(κ₁, κ₂) d'une paire: κ₁ = (QA - B)coth(βB/2) + Δε, κ₂ = ½[(B-QA)² csch² - (1-Q²)A²(csch² + 2)]"""
    y = beta * eps0
    denom = np.expm1(-y)
    coth = -(1.0 + np.exp(-y)) / denom
    csch2 = 4.0 * np.exp(-y) / denom ** 2

    def pair(weight):
        k1 = (weight * eps_tau - eps0) * coth + (eps_tau - eps0)
        k2 = 0.5 * ((eps0 - weight * eps_tau) ** 2 * csch2 - (1.0 - weight ** 2) * eps_tau ** 2 * (csch2 + 2.0))
        return k1, k2

    k1, k2 = pair(1.0 + 2.0 * sign * p_q)
    if subtract_adiabatic:
        a1, a2 = pair(1.0)
        k1, k2 = k1 - a1, k2 - a2
    return k1, k2


def cumulants_thermal(p: QuenchProtocol, alpha: Optional[float], N: int, q_source: ModeSource = None,
                      convention: str = 'bosonic', mode_set: str = 'continuum',
                      subtract_adiabatic: bool = False) -> CumulantSet:
    """
    Cumulants κ₁, κ₂ d'une trempe depuis un état thermique

    Args:
        subtract_adiabatic (bool): Retrancher point par point l'intégrande à p_q ≡ 0

    Returns:
        CumulantSet: méthode 'analytic-integral', n_max = 2
    """
    if p.is_ground_state or p.beta <= 0:
        raise DomainError("cumulants_thermal requiert 0 < β < ∞")
    _validate_chain(N, alpha, mode_set)
    sign = occupation_sign(convention)
    source = q_source or asymptotic_source
    v_tau = luttinger_params(p.delta_f, p.J).v

    if mode_set == 'discrete':
        q = discrete_momenta(N)
        k1, k2 = _thermal_pair_cumulants(p.J * q, v_tau * q, source(q, p), p.beta, sign, subtract_adiabatic)
        kappas = (float(np.sum(k1)), float(np.sum(k2)))
    else:
        def integrand(q):
            p_q = source(np.array([q]), p)[0]
            return np.array(_thermal_pair_cumulants(p.J * q, v_tau * q, p_q, p.beta, sign, subtract_adiabatic))

        total = _integrate_modes(integrand, p, alpha, 'cumulants thermiques')
        kappas = tuple(float(x) for x in N / (2.0 * math.pi) * total)

    return CumulantSet(kappas=kappas, method='analytic-integral', regulator=alpha,
                       meta={'protocol': p.to_dict(), 'N': N, 'convention': convention,
                             'mode_set': mode_set, 'subtract_adiabatic': subtract_adiabatic})


def cumulants_frame(rows: Sequence[Tuple[float, CumulantSet]], source: str) -> pd.DataFrame:
    """Tableau (tau_q, kappa1, kappa2, kappa3, method, alpha, source)"""
    records = []
    for tau_q, cumulants in rows:
        record = {'tau_q': tau_q}
        record.update(cumulants.to_row())
        record['source'] = source
        records.append(record)
    columns = ['tau_q', 'kappa1', 'kappa2', 'kappa3', 'method', 'alpha', 'source']
    return pd.DataFrame(records, columns=columns)


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Écrit un tableau CSV (17 chiffres significatifs, fins de ligne LF)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=OUTPUT_CONFIG['float_format'],
                 lineterminator=OUTPUT_CONFIG['line_terminator'])
    logger.info(f"💾 Données sauvegardées dans {path}")
    return path
