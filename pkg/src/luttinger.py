"""
Module de paramétrisation du liquide de Tomonaga-Luttinger (TLL) et de dynamique des modes

Chaque mode q évolue indépendamment: l'équation de Sturm-Liouville pour f₋(t)
est intégrée de t = 0 à τ_Q, puis les coefficients de Heisenberg (x₁, x₂) sont
projetés sur les opérateurs diagonaux de l'hamiltonien final (y₁, y₂).
"""

import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np
from scipy import integrate

from airy import airy_functions
from config import PROTOCOL_CONFIG, SOLVER_CONFIG
from errors import DomainError, SolverError

logger = logging.getLogger(__name__)

VELOCITY_MODELS = ('bethe_ansatz', 'linearized')
_INTEGRATORS = {'DOP853': integrate.DOP853, 'RK45': integrate.RK45}

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class QuenchProtocol:
    """
    Trempe linéaire Δ(t) = Δ_f·t/τ_Q depuis le point libre Δ(0) = 0

    Attributes:
        J (float): Échelle d'énergie
        delta_f (float): Anisotropie finale, |Δ_f| < 1
        tau_q (float): Durée de la trempe (en 1/J)
        beta (float): Température inverse, inf pour l'état fondamental
    """
    J: float = PROTOCOL_CONFIG['J']
    delta_f: float = PROTOCOL_CONFIG['delta_f']
    tau_q: float = PROTOCOL_CONFIG['tau_q']
    beta: float = PROTOCOL_CONFIG['beta']

    def __post_init__(self):
        if not (math.isfinite(self.J) and self.J > 0):
            raise DomainError(f"J doit être strictement positif (reçu {self.J})")
        if not abs(self.delta_f) < 1:
            raise DomainError(f"|Δ_f| < 1 requis pour rester dans la phase sans gap (reçu {self.delta_f})")
        if not (math.isfinite(self.tau_q) and self.tau_q >= 0):
            raise DomainError(f"τ_Q doit être fini et positif (reçu {self.tau_q})")
        if math.isnan(self.beta) or self.beta < 0:
            raise DomainError(f"β doit être positif ou infini (reçu {self.beta})")

    @property
    def is_ground_state(self) -> bool:
        return math.isinf(self.beta)

    @property
    def p0(self) -> float:
        """Probabilité d'excitation soudaine p₀ = (Δ_f/π)²"""
        return (self.delta_f / math.pi) ** 2

    def delta(self, t: float) -> float:
        if self.tau_q == 0:
            return 0.0
        return self.delta_f * t / self.tau_q

    def with_tau(self, tau_q: float) -> 'QuenchProtocol':
        return replace(self, tau_q=tau_q)

    def with_beta(self, beta: float) -> 'QuenchProtocol':
        return replace(self, beta=beta)

    def to_dict(self) -> Dict:
        return {
            'J': self.J,
            'delta_f': self.delta_f,
            'tau_q': self.tau_q,
            'beta': 'inf' if self.is_ground_state else self.beta,
        }


@dataclass(frozen=True)
class LuttingerParams:
    """Vitesse v et paramètre de Luttinger K"""
    v: float
    K: float

    @property
    def vK(self) -> float:
        return self.v * self.K

    @property
    def v_over_K(self) -> float:
        return self.v / self.K


@dataclass(frozen=True)
class ModeSolverOptions:
    """Options de l'intégrateur de l'équation de mode"""
    abs_tol: float = SOLVER_CONFIG['abs_tol']
    rel_tol: float = SOLVER_CONFIG['rel_tol']
    max_steps: int = SOLVER_CONFIG['max_steps']
    method: str = SOLVER_CONFIG['method']
    velocity_model: str = SOLVER_CONFIG['velocity_model']
    constraint_tol: float = SOLVER_CONFIG['constraint_tol']

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.constraint_tol > 0):
            raise DomainError("Les tolérances de l'intégrateur doivent être > 0")
        if self.max_steps < 1:
            raise DomainError("Le budget de pas doit être >= 1")
        if self.method not in _INTEGRATORS:
            raise DomainError(f"Méthode inconnue: {self.method} (choix: {sorted(_INTEGRATORS)})")
        if self.velocity_model not in VELOCITY_MODELS:
            raise DomainError(f"Modèle de vitesse inconnu: {self.velocity_model}")


@dataclass(frozen=True)
class ModeSolution:
    """
    Solution d'un mode q à t = τ_Q

    Q_q = 1 - 2p_q est la forme imprimée; bosonic_weight = 1 + 2p_q est la
    valeur issue de la trace bosonique à deux modes.
    """
    q: float
    x1: complex
    x2: complex
    y1: complex
    y2: complex
    p_q: float
    Q_q: float
    f_minus: complex = 1.0 + 0j
    f_plus: complex = 1.0 + 0j
    max_constraint_error: float = 0.0
    steps: int = 0

    @property
    def bosonic_weight(self) -> float:
        return 1.0 + 2.0 * self.p_q

    @property
    def x_constraint(self) -> float:
        return abs(self.x1) ** 2 - abs(self.x2) ** 2

    @property
    def y_constraint(self) -> float:
        return abs(self.y1) ** 2 - abs(self.y2) ** 2

    def to_record(self) -> Dict[str, float]:
        record = {'q': self.q}
        for name in ('x1', 'x2', 'y1', 'y2'):
            value = getattr(self, name)
            record[f'{name}_re'] = value.real
            record[f'{name}_im'] = value.imag
        record['p_q'] = self.p_q
        return record


def luttinger_params(delta: float, J: float = 1.0) -> LuttingerParams:
    """
    Paramètres TLL exacts (ansatz de Bethe) de la chaîne XXZ

    Args:
        delta (float): Anisotropie Δ, |Δ| ≤ 1
        J (float): Échelle d'énergie

    Returns:
        LuttingerParams: v = Jπ√(1-Δ²)/(2 arccos Δ), K = (π/2)/(π - arccos Δ)
    """
    if not math.isfinite(delta) or abs(delta) > 1:
        raise DomainError(f"|Δ| ≤ 1 requis (reçu {delta})")
    if delta == 1.0:
        return LuttingerParams(v=0.0, K=0.5)
    if delta == -1.0:
        return LuttingerParams(v=0.0, K=math.inf)
    theta = math.acos(delta)
    return LuttingerParams(
        v=J * math.pi * math.sqrt(1.0 - delta * delta) / (2.0 * theta),
        K=0.5 * math.pi / (math.pi - theta),
    )


class _VelocityModel:
    """v(Δ), K(Δ) et d ln(vK)/dΔ pour l'équation de mode"""

    def __init__(self, name: str, J: float):
        self.name = name
        self.J = J

    def params(self, delta: float) -> LuttingerParams:
        if self.name == 'bethe_ansatz':
            return luttinger_params(delta, self.J)
        # Vitesse linéarisée v² = J²(1 + 4Δ/π) avec vK = J
        kappa = 1.0 + 4.0 * delta / math.pi
        if kappa <= 0:
            raise DomainError(f"Modèle linéarisé invalide pour Δ={delta} (1 + 4Δ/π ≤ 0)")
        return LuttingerParams(v=self.J * math.sqrt(kappa), K=1.0 / math.sqrt(kappa))

    def dlog_vk(self, delta: float) -> float:
        if self.name == 'linearized':
            return 0.0
        root = math.sqrt(1.0 - delta * delta)
        theta = math.acos(delta)
        return -delta / (1.0 - delta * delta) + 1.0 / (theta * root) - 1.0 / ((math.pi - theta) * root)

    def gamma(self, delta: float) -> float:
        return -0.5 * math.log(self.params(delta).K)


def coupling_profile(t: float, p: QuenchProtocol) -> Tuple[float, float]:
    """
    Facteurs (1 + g₄(t), g₂(t)) de l'hamiltonien bosonisé

    g₂ et g₄ sont déduits de vK et v/K exacts:
    g₂ = (v/K - vK)/(2v_F), g₄ = (v/K + vK)/(2v_F) - 1, avec v_F = J.
    """
    slack = 1e-12 * max(1.0, p.tau_q)
    if t < -slack or t > p.tau_q + slack:
        raise DomainError(f"t={t} hors de [0, τ_Q={p.tau_q}]")
    lp = luttinger_params(p.delta(min(max(t, 0.0), p.tau_q)), p.J)
    v_f = p.J
    g2 = (lp.v_over_K - lp.vK) / (2.0 * v_f)
    g4 = (lp.v_over_K + lp.vK) / (2.0 * v_f) - 1.0
    return 1.0 + g4, g2


def bogoliubov_map(x1: complex, x2: complex, gamma_tau: float) -> Tuple[complex, complex]:
    """
    Coefficients des opérateurs diagonaux finaux

    y₁ = x₁ cosh γ - x₂ sinh γ, y₂ = x₁ sinh γ - x₂ cosh γ (γ(0) = 0).
    La transformation est symplectique: |y₁|² - |y₂|² = |x₁|² - |x₂|².
    """
    ch = math.cosh(gamma_tau)
    sh = math.sinh(gamma_tau)
    return x1 * ch - x2 * sh, x1 * sh - x2 * ch


def _build_solution(q: float, f_minus: complex, f_plus: complex, gamma_tau: float,
                    max_error: float = 0.0, steps: int = 0) -> ModeSolution:
    x1 = 0.5 * (f_plus + f_minus)
    x2 = 0.5 * (f_plus - f_minus)
    y1, y2 = bogoliubov_map(x1, x2, gamma_tau)
    p_q = abs(y2) ** 2
    return ModeSolution(
        q=q, x1=complex(x1), x2=complex(x2), y1=complex(y1), y2=complex(y2),
        p_q=p_q, Q_q=1.0 - 2.0 * p_q, f_minus=complex(f_minus), f_plus=complex(f_plus),
        max_constraint_error=max_error, steps=steps,
    )


def solve_mode(q: float, p: QuenchProtocol, opts: ModeSolverOptions = None) -> ModeSolution:
    """
    Intègre l'équation de mode f̈₋ - (d ln vK/dt) ḟ₋ + (qv)² f₋ = 0

    Conditions initiales f₋(0) = 1, ḟ₋(0) = -iq v(0)K(0), soit x₁(0) = 1,
    x₂(0) = 0. La contrainte canonique Re(f₊ f₋*) = 1 est vérifiée à chaque
    pas accepté.

    Args:
        q (float): Impulsion du mode (> 0)
        p (QuenchProtocol): Protocole de trempe
        opts (ModeSolverOptions): Options de l'intégrateur

    Returns:
        ModeSolution: Coefficients à t = τ_Q
    """
    if not (math.isfinite(q) and q > 0):
        raise DomainError(f"q doit être strictement positif (reçu {q})")
    opts = opts or ModeSolverOptions()
    model = _VelocityModel(opts.velocity_model, p.J)
    final = model.params(p.delta_f)
    gamma_tau = -0.5 * math.log(final.K)

    # Limite soudaine: aucun temps d'évolution
    if p.tau_q == 0.0:
        return _build_solution(q, 1.0 + 0j, 1.0 + 0j, gamma_tau)

    rate = p.delta_f / p.tau_q

    def rhs(t, y):
        delta = rate * t
        omega = q * model.params(delta).v
        friction = model.dlog_vk(delta) * rate
        return np.array([y[1], friction * y[1] - omega * omega * y[0]])

    def constraint(t, y):
        vk = model.params(rate * t).vK
        f_plus = 1j * y[1] / (q * vk)
        return abs((f_plus * np.conj(y[0])).real - 1.0)

    y0 = np.array([1.0 + 0j, -1j * q * model.params(0.0).vK])
    solver = _INTEGRATORS[opts.method](rhs, 0.0, y0, p.tau_q,
                                        rtol=opts.rel_tol, atol=opts.abs_tol)
    limit = max(10.0 * opts.rel_tol, opts.constraint_tol)
    worst = 0.0
    steps = 0

    while solver.status == 'running':
        if steps >= opts.max_steps:
            raise SolverError(f"Budget de {opts.max_steps} pas épuisé pour q={q} (t={solver.t:.6g})")
        message = solver.step()
        if solver.status == 'failed':
            raise SolverError(f"Échec de l'intégrateur pour q={q}: {message}")
        steps += 1
        worst = max(worst, constraint(solver.t, solver.y))
        if worst > limit:
            raise SolverError(
                f"Contrainte canonique violée pour q={q}: écart {worst:.2e} > {limit:.1e} à t={solver.t:.6g}"
            )

    f_minus = solver.y[0]
    f_plus = 1j * solver.y[1] / (q * final.vK)
    logger.debug(f"   ✓ Mode q={q:.4g}: {steps} pas, contrainte {worst:.1e}")
    return _build_solution(q, f_minus, f_plus, gamma_tau, worst, steps)


def solve_modes(qs: Iterable[float], p: QuenchProtocol, opts: ModeSolverOptions = None) -> List[ModeSolution]:
    """Résout une liste de modes indépendants"""
    return [solve_mode(float(q), p, opts) for q in qs]


def pq_asymptotic(q: ArrayLike, p: QuenchProtocol) -> ArrayLike:
    """
    Probabilité d'excitation p₀ sinc²(Jqτ_Q), p₀ = (Δ_f/π)²

    Args:
        q: Impulsion(s), q ≥ 0

    Returns:
        Probabilité(s) de même forme que q
    """
    q_arr = np.asarray(q, dtype=float)
    values = p.p0 * np.sinc(p.J * q_arr * p.tau_q / math.pi) ** 2
    if values.ndim == 0:
        return float(values)
    return values


def _airy_setup(q: float, p: QuenchProtocol) -> Tuple[complex, float, float]:
    if not (q > 0 and p.tau_q > 0 and p.delta_f != 0):
        raise DomainError("Solution d'Airy définie pour q > 0, τ_Q > 0 et Δ_f ≠ 0")
    kappa = 1.0 + 4.0 * p.delta_f / math.pi
    if kappa <= 0:
        raise DomainError(f"1 + 4Δ_f/π doit être > 0 (Δ_f={p.delta_f})")
    tau_tilde = p.tau_q * math.pi / (4.0 * p.delta_f)
    return tau_tilde, kappa, p.J * q * tau_tilde


def airy_f_minus(q: float, p: QuenchProtocol) -> Tuple[complex, complex]:
    """
    Solution exacte (f₋, f₊) à t = τ_Q pour la vitesse linéarisée v² = J²(1 + t/τ̃)

    α = (iJqτ̃)^{2/3}, τ̃ = πτ_Q/(4Δ_f), κ = 1 + 4Δ_f/π.

    Returns:
        tuple: (f₋, f₊) à comparer à solve_mode(velocity_model='linearized')
    """
    tau_tilde, kappa, phase = _airy_setup(q, p)
    alpha = complex(1j * phase) ** (2.0 / 3.0)
    root = alpha ** 0.5

    ai, aip, bi, bip = airy_functions(np.array([alpha, alpha * kappa]))
    a_coef = bip[0] + root * bi[0]
    b_coef = aip[0] + root * ai[0]

    f_minus = math.pi * (a_coef * ai[1] - b_coef * bi[1])
    f_plus = -(math.pi / root) * (a_coef * aip[1] - b_coef * bip[1])
    return complex(f_minus), complex(f_plus)


def airy_asymptotic_f_minus(q: float, p: QuenchProtocol) -> complex:
    """Développement de f₋ à grand Jqτ̃ (erreur O((Jqτ̃)⁻²))"""
    tau_tilde, kappa, x = _airy_setup(q, p)
    phase = p.J * math.pi * p.tau_q * (kappa ** 1.5 - 1.0) / (6.0 * p.delta_f) * q
    forward = np.exp(-1j * phase) * (1.0 - (1.0 + 5.0 * kappa ** -1.5) / (48j * x))
    backward = np.exp(1j * phase) / (8j * x)
    return complex(kappa ** -0.25 * (forward + backward))


def pq_landau_zener(q: ArrayLike, z: float, a: float, p: QuenchProtocol) -> ArrayLike:
    """
    Probabilité de Landau-Zener du modèle à deux bandes, exp(-π s_q² τ_Q/(2 r_q))

    Args:
        q: Impulsion(s) > 0
        z (float): Exposant de r_q = J q^z (z ≥ 1)
        a (float): Exposant de s_q = J q^a (a ≥ z)
    """
    q_arr = np.asarray(q, dtype=float)
    if np.any(q_arr <= 0):
        raise DomainError("q > 0 requis pour le modèle de Landau-Zener")
    if z < 1 or a < z:
        raise DomainError(f"Exposants invalides: z={z}, a={a} (z ≥ 1, a ≥ z)")
    r = p.J * q_arr ** z
    s = p.J * q_arr ** a
    values = np.exp(-math.pi * s * s * p.tau_q / (2.0 * r))
    if values.ndim == 0:
        return float(values)
    return values


def lz_moment(n: int, z: float, a: float, p: QuenchProtocol, d: int = 1) -> float:
    """∫ dq q^{d-1} (J q^z)^n p_q pour le modèle de Landau-Zener"""
    if p.tau_q <= 0:
        raise DomainError("τ_Q > 0 requis (l'intégrale diverge dans la limite soudaine)")

    def integrand(q):
        return q ** (d - 1) * (p.J * q ** z) ** n * pq_landau_zener(q, z, a, p)

    value, _ = integrate.quad(integrand, 0.0, np.inf, limit=200)
    return value


def mode_energies(q: ArrayLike, p: QuenchProtocol) -> Tuple[ArrayLike, ArrayLike]:
    """Énergies initiale ε_q⁰ = Jq et finale ε_q^τ = v(Δ_f) q"""
    q_arr = np.asarray(q, dtype=float)
    v_tau = luttinger_params(p.delta_f, p.J).v
    return p.J * q_arr, v_tau * q_arr


def save_modes_json(modes: Iterable[ModeSolution], path: Union[str, Path]) -> Path:
    """Écrit les solutions de mode en JSON (précision complète des flottants)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = [mode.to_record() for mode in modes]
    path.write_text(json.dumps(records, indent=2) + '\n', encoding='utf-8')
    logger.info(f"✅ {len(records)} modes sauvegardés dans {path}")
    return path
