"""
Module oracle dans l'espace de Fock tronqué

Vérifie par calcul matriciel direct sur une paire de modes couplés:
    - le facteur g_q(u) de la fonction caractéristique thermique
    - la formule de trace des formes quadratiques bosoniques
"""

import logging
import math
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import linalg, sparse

from config import ORACLE_CONFIG, SOLVER_CONFIG
from errors import ConvergenceError, DomainError, TruncationError
from luttinger import ModeSolution, QuenchProtocol, mode_energies
from workstats import pair_log_cfw

logger = logging.getLogger(__name__)


class TwoModeFockSpace:
    """Espace de Fock tronqué à n_max quanta par mode"""

    def __init__(self, n_max: int, n_modes: int = 2):
        """
        Initialise les opérateurs d'échelle

        Args:
            n_max (int): Occupation maximale par mode
            n_modes (int): 1 ou 2 modes
        """
        if n_max < 1:
            raise DomainError(f"n_max doit être ≥ 1 (reçu {n_max})")
        if n_modes not in (1, 2):
            raise DomainError("Seuls 1 ou 2 modes sont pris en charge")
        self.n_max = n_max
        self.n_modes = n_modes

        single = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)
        identity = np.eye(n_max + 1)
        if n_modes == 1:
            self.annihilators = [single]
        else:
            self.annihilators = [np.kron(single, identity), np.kron(identity, single)]
        self.creators = [a.conj().T for a in self.annihilators]

        levels = np.arange(n_max + 1)
        if n_modes == 1:
            self.occupations = levels[:, None]
        else:
            self.occupations = np.stack(np.meshgrid(levels, levels, indexing='ij'), axis=-1).reshape(-1, 2)

    @property
    def dimension(self) -> int:
        return (self.n_max + 1) ** self.n_modes

    @property
    def total_number(self) -> np.ndarray:
        """n₁ + n₂ sur la base produit"""
        return self.occupations.sum(axis=1)

    @property
    def quadrature_vector(self) -> List[np.ndarray]:
        """(d₁, …, d₁†, …)"""
        return self.annihilators + self.creators

    def commutator_defect(self) -> float:
        """max |[b, b†] - 1| hors du bord de troncature"""
        inside = np.all(self.occupations < self.n_max, axis=1)
        defect = 0.0
        for a, ad in zip(self.annihilators, self.creators):
            comm = a @ ad - ad @ a - np.eye(self.dimension)
            defect = max(defect, float(np.max(np.abs(comm[np.ix_(inside, inside)]))))
        return defect

    def quadratic_form(self, S: np.ndarray) -> np.ndarray:
        """½ dᵀ S d sur l'espace tronqué"""
        ops = [sparse.csr_matrix(op) for op in self.quadrature_vector]
        out = sparse.csr_matrix((self.dimension, self.dimension), dtype=complex)
        for i, left in enumerate(ops):
            for j, right in enumerate(ops):
                if S[i, j] != 0:
                    out = out + 0.5 * S[i, j] * (left @ right)
        return out.toarray()


class TraceCheck(NamedTuple):
    """Trace directe (lhs) et forme close (rhs)"""
    lhs: complex
    rhs: complex

    @property
    def relative_deviation(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.rhs), 1e-300)


def _check_symplectic(mode: ModeSolution):
    defect = abs(mode.y_constraint - 1.0)
    if defect > SOLVER_CONFIG['constraint_tol']:
        raise DomainError(f"|y₁|² - |y₂|² ≠ 1 (écart {defect:.2e})")


def _thermal_tail(beta_eps: float, n_max: int) -> float:
    return 2.0 * math.exp(-beta_eps * (n_max + 1))


def _squeezing_tail(p_q: float, n_max: int) -> float:
    return (p_q / (1.0 + p_q)) ** (n_max + 1)


def required_n_max(beta_eps: float, p_q: float = 0.0) -> int:
    """Plus petite troncature dont les queues thermique et de compression sont < tail_tol"""
    n_max = ORACLE_CONFIG['min_n_max']
    while max(_thermal_tail(beta_eps, n_max), _squeezing_tail(p_q, n_max)) > ORACLE_CONFIG['tail_tol']:
        n_max += 1
    return n_max


def gq_oracle(q: float, p: QuenchProtocol, mode: ModeSolution, u: float,
              n_max: Optional[int] = None) -> complex:
    """
    Tr(e^{iuH_τ^H} e^{-i(u-iβ)H₀}) / Tr(e^{-βH₀}) sur deux modes tronqués

    H₀ = ε⁰(d₁†d₁ + d₂†d₂), H_τ^H = ε^τ(X₁†X₁ + X₂†X₂), X₁ = y₁d₁ + y₂* d₂†, X₂ = y₁d₂ + y₂* d₁†.

    Args:
        q (float): Impulsion
        p (QuenchProtocol): Protocole à β fini
        mode (ModeSolution): Coefficients (y₁, y₂)
        u (float): Argument de la CFW
        n_max (int): Troncature (défaut: required_n_max)

    Returns:
        complex: Facteur de trace normalisé
    """
    if p.is_ground_state or p.beta <= 0:
        raise DomainError("gq_oracle requiert 0 < β < ∞")
    _check_symplectic(mode)
    eps0, eps_tau = (float(x) for x in mode_energies(q, p))
    beta_eps = p.beta * eps0
    if n_max is None:
        n_max = required_n_max(beta_eps, mode.p_q)

    tail = max(_thermal_tail(beta_eps, n_max), _squeezing_tail(mode.p_q, n_max))
    if tail > ORACLE_CONFIG['trace_tol']:
        raise TruncationError(f"Troncature n_max={n_max} insuffisante: queue {tail:.2e}")

    space = TwoModeFockSpace(n_max)
    d1, d2 = space.annihilators
    c1, c2 = space.creators
    x1 = mode.y1 * d1 + np.conj(mode.y2) * c2
    x2 = mode.y1 * d2 + np.conj(mode.y2) * c1
    h_final = eps_tau * (x1.conj().T @ x1 + x2.conj().T @ x2)

    levels, vectors = linalg.eigh(h_final)
    n_total = space.total_number
    weights = np.exp(-(1j * u + p.beta) * eps0 * n_total)
    trace = np.dot(np.abs(vectors) ** 2 @ np.exp(1j * u * levels), weights)
    return complex(trace / np.sum(np.exp(-p.beta * eps0 * n_total)))


def gq_formula(q: float, p: QuenchProtocol, mode: ModeSolution, u: float) -> complex:
    """
    Contribution de la paire sans les phases de point zéro, à comparer à gq_oracle

    pair_log_cfw porte e^{2iu(ε^τ - ε⁰)}: le décalage de E_g et le facteur e^{iφ} de g_q(u)/g_q(0).
    Les hamiltoniens de l'oracle n'ont pas d'énergie de point zéro.
    """
    eps0, eps_tau = (float(x) for x in mode_energies(q, p))
    log_pair = pair_log_cfw(eps0, eps_tau, mode.p_q, u, p.beta, 'bosonic', J=p.J)
    return complex(np.exp(log_pair - 2j * u * (eps_tau - eps0)))


def oracle_deviation(q: float, p: QuenchProtocol, mode: ModeSolution, u: float,
                     n_max: Optional[int] = None) -> float:
    """Écart relatif entre l'oracle et la formule fermée"""
    oracle = gq_oracle(q, p, mode, u, n_max)
    formula = gq_formula(q, p, mode, u)
    return abs(oracle - formula) / abs(formula)


def _symplectic_unit(n_modes: int) -> np.ndarray:
    identity = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, identity], [-identity, zero]])


def harmonic_form(eps: float, n_modes: int = 2) -> np.ndarray:
    """Λ tel que ½dᵀΛd = ε Σ(d†d + ½)"""
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eps * np.eye(n_modes)], [eps * np.eye(n_modes), zero]]).astype(complex)


def bogoliubov_matrix(y1: complex, y2: complex) -> np.ndarray:
    """Υ tel que (X₁, X₂, X₁†, X₂†) = Υ (d₁, d₂, d₁†, d₂†)"""
    identity = np.eye(2)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    return np.block([[y1 * identity, np.conj(y2) * swap], [y2 * swap, np.conj(y1) * identity]])


def thermal_form(eps: float, beta: float, n_modes: int = 2) -> np.ndarray:
    """Forme -βΛ de l'état thermique"""
    return -beta * harmonic_form(eps, n_modes)


def cfw_forms(q: float, p: QuenchProtocol, mode: ModeSolution, u: float) -> List[np.ndarray]:
    """
    Formes quadratiques [iuΥᵀΛ_τΥ, -i(u - iβ)Λ₀] dont le produit d'exponentielles
    donne la trace de la CFW thermique (énergies de point zéro incluses)
    """
    _check_symplectic(mode)
    eps0, eps_tau = (float(x) for x in mode_energies(q, p))
    upsilon = bogoliubov_matrix(mode.y1, mode.y2)
    beta = 0.0 if p.is_ground_state else p.beta
    return [
        1j * u * upsilon.T @ harmonic_form(eps_tau) @ upsilon,
        -1j * (u - 1j * beta) * harmonic_form(eps0),
    ]


def _closed_form_value(forms: Sequence[np.ndarray], n_modes: int) -> complex:
    tau_b = _symplectic_unit(n_modes)
    product = np.eye(2 * n_modes, dtype=complex)
    for S in forms:
        product = product @ linalg.expm(tau_b @ S)
    return complex((-1) ** n_modes * linalg.det(product - np.eye(2 * n_modes)))


def _operator_exponential(operator: np.ndarray) -> np.ndarray:
    """e^A: diagonale directe, décomposition spectrale si A = ±A† ou ±iA hermitien, sinon expm"""
    scale = max(float(np.max(np.abs(operator))), 1.0)
    diagonal = np.diagonal(operator)
    if np.max(np.abs(operator - np.diag(diagonal))) <= 1e-13 * scale:
        return np.diag(np.exp(diagonal))

    for factor in (1.0, 1j):
        hermitian = operator / factor
        if np.max(np.abs(hermitian - hermitian.conj().T)) <= 1e-13 * scale:
            levels, vectors = linalg.eigh(0.5 * (hermitian + hermitian.conj().T))
            return (vectors * np.exp(factor * levels)) @ vectors.conj().T
    return linalg.expm(operator)


def _direct_trace(forms: Sequence[np.ndarray], n_modes: int, n_max: int) -> complex:
    space = TwoModeFockSpace(n_max, n_modes)
    product = np.eye(space.dimension, dtype=complex)
    for S in forms:
        product = product @ _operator_exponential(space.quadratic_form(S))
    return complex(np.trace(product))


def trace_formula_check(S_list: Sequence[np.ndarray], n_modes: int = 2,
                        n_max: int = None) -> TraceCheck:
    """
    Tr Π exp(½dᵀS_i d) directe et forme close [(-1)ⁿ det(Π e^{τ_B S_i} - I)]^{-1/2}

    La branche de la racine est suivie par continuité le long de S_i(λ) = (1-λ)R_i + λS_i,
    R₁ = -Λ(1) (état thermique, racine réelle positive) et R_i = 0 pour i > 1.

    Raises:
        ConvergenceError: Saut de branche le long de l'homotopie
        TruncationError: Trace directe non convergée à la troncature donnée
    """
    n_max = n_max or ORACLE_CONFIG['n_max']
    forms = [np.asarray(S, dtype=complex) for S in S_list]
    size = 2 * n_modes
    for S in forms:
        if S.shape != (size, size):
            raise DomainError(f"Forme de taille {S.shape} incompatible avec {n_modes} mode(s)")
        if np.max(np.abs(S - S.T)) > 1e-12:
            raise DomainError("Les formes quadratiques doivent être symétriques")
    if not forms:
        raise DomainError("Au moins une forme quadratique est requise")

    references = [-harmonic_form(1.0, n_modes)] + [np.zeros((size, size), dtype=complex)] * (len(forms) - 1)
    root = None
    for lam in np.linspace(0.0, 1.0, ORACLE_CONFIG['homotopy_points']):
        path = [(1.0 - lam) * R + lam * S for R, S in zip(references, forms)]
        candidate = np.sqrt(_closed_form_value(path, n_modes))
        if root is None:
            root = candidate
            continue
        candidate = candidate if abs(candidate - root) <= abs(candidate + root) else -candidate
        if abs(candidate - root) > ORACLE_CONFIG['branch_jump'] * abs(root):
            raise ConvergenceError(f"Saut de branche de la racine en λ={lam:.4f}")
        root = candidate
    rhs = 1.0 / root

    lhs = _direct_trace(forms, n_modes, n_max)
    coarse = _direct_trace(forms, n_modes, max(1, n_max // 2))
    if abs(lhs - coarse) > ORACLE_CONFIG['trace_tol'] * abs(lhs):
        raise TruncationError(f"Trace directe non convergée: n_max={n_max} et {max(1, n_max // 2)} "
                              f"diffèrent de {abs(lhs - coarse):.2e}")

    logger.debug(f"Formule de trace: lhs={lhs:.10g}, rhs={rhs:.10g}")
    return TraceCheck(lhs=lhs, rhs=complex(rhs))
