"""
Module de diagonalisation exacte de la chaîne XXZ de spin ½

La chaîne est construite dans un secteur d'aimantation totale fixée (bits à 1 = spins ↑),
évoluée le long de la rampe Δ(t) par un produit au point milieu, puis les statistiques
de travail du schéma à deux mesures sont obtenues à partir des spectres de H₀ et H_τ.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from config import ED_CONFIG
from errors import ConvergenceError, DomainError
from luttinger import QuenchProtocol
from workstats import CfwCurve, CumulantSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChainSpec:
    """
    Géométrie de la chaîne

    Attributes:
        N (int): Nombre de sites
        pbc (bool): Conditions aux limites périodiques
        sector (float): Aimantation totale M, None pour l'espace complet
    """
    N: int
    pbc: bool = True
    sector: Optional[float] = 0.0

    def __post_init__(self):
        if not 2 <= self.N <= ED_CONFIG['max_sites']:
            raise DomainError(f"N doit être compris entre 2 et {ED_CONFIG['max_sites']} (reçu {self.N})")
        if self.N == 2 and self.pbc:
            raise DomainError("N = 2 périodique double la liaison: utiliser pbc=False")
        if self.sector is not None:
            n_up = self.N / 2.0 + self.sector
            if n_up != int(n_up) or not 0 <= n_up <= self.N:
                raise DomainError(f"Secteur M={self.sector} inaccessible pour N={self.N}")

    @property
    def n_up(self) -> Optional[int]:
        return None if self.sector is None else int(self.N / 2.0 + self.sector)

    @property
    def bonds(self) -> List[Tuple[int, int]]:
        last = self.N if self.pbc else self.N - 1
        return [(j, (j + 1) % self.N) for j in range(last)]


@dataclass(frozen=True)
class SpinOperator:
    """Opérateur creux dans la base d'un secteur (configurations de bits triées)"""
    matrix: sparse.csr_matrix
    basis: np.ndarray

    def __post_init__(self):
        matrix = sparse.csr_matrix(self.matrix, dtype=complex)
        object.__setattr__(self, 'matrix', matrix)
        if matrix.shape != (len(self.basis), len(self.basis)):
            raise DomainError("Dimension de l'opérateur incompatible avec la base")
        defect = abs(matrix - matrix.conj().T).max() if matrix.nnz else 0.0
        if defect > 1e-12:
            raise DomainError(f"Opérateur non hermitien (écart {defect:.2e})")

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def norm(self) -> float:
        """Borne de la norme spectrale (norme ligne)"""
        return float(sparse_linalg.norm(self.matrix, ord=np.inf))

    def __add__(self, other: 'SpinOperator') -> 'SpinOperator':
        return SpinOperator(self.matrix + other.matrix, self.basis)

    def scaled(self, factor: float) -> 'SpinOperator':
        return SpinOperator(factor * self.matrix, self.basis)


@dataclass(frozen=True)
class EdOptions:
    """Paramètres de l'évolution temporelle (défauts dans ED_CONFIG)"""
    initial_steps: int = ED_CONFIG['initial_steps']
    steps_per_unit_time: float = ED_CONFIG['steps_per_unit_time']
    max_doublings: int = ED_CONFIG['max_doublings']
    state_tol: float = ED_CONFIG['state_tol']
    dense_expm_dimension: int = ED_CONFIG['dense_expm_dimension']
    merge_tol: float = ED_CONFIG['merge_tol']

    def __post_init__(self):
        if self.initial_steps < 1 or self.max_doublings < 0:
            raise DomainError("Nombre de pas et de doublements invalides")
        if not self.state_tol > 0:
            raise DomainError("state_tol doit être > 0")


@dataclass(frozen=True)
class EvolutionResult:
    """États évolués U(τ_Q)|ψ⟩ (une colonne par état initial)"""
    states: np.ndarray
    steps: int
    change: float


@dataclass(frozen=True)
class WorkDistribution:
    """
    Distribution P(W) du schéma à deux mesures

    Attributes:
        work (np.ndarray): Valeurs W triées
        probs (np.ndarray): Probabilités associées
        meta (dict): Protocole, N, β
    """
    work: np.ndarray
    probs: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        work = np.asarray(self.work, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, 'work', work)
        object.__setattr__(self, 'probs', probs)
        if work.shape != probs.shape or work.ndim != 1:
            raise DomainError("work et probs doivent être des vecteurs de même longueur")
        if np.any(np.diff(work) < 0):
            raise DomainError("Les valeurs de W doivent être triées")
        if np.any(probs < -1e-14):
            raise DomainError("Probabilité négative")
        if abs(probs.sum() - 1.0) > 1e-10:
            raise DomainError(f"Probabilités non normalisées (somme {probs.sum():.15g})")

    @property
    def entries(self) -> List[Tuple[float, float]]:
        return list(zip(self.work.tolist(), self.probs.tolist()))

    def mean(self) -> float:
        return float(np.dot(self.probs, self.work))

    def central_moment(self, k: int) -> float:
        return float(np.dot(self.probs, (self.work - self.mean()) ** k))

    def cumulants(self, n_max: int = 3) -> CumulantSet:
        """Cumulants à partir des moments centrés"""
        if not 1 <= n_max <= 4:
            raise DomainError("n_max doit être compris entre 1 et 4")
        mu2, mu3, mu4 = (self.central_moment(k) for k in (2, 3, 4))
        kappas = (self.mean(), mu2, mu3, mu4 - 3.0 * mu2 ** 2)[:n_max]
        return CumulantSet(kappas=kappas, method='ttm-moments', meta=dict(self.meta))

    def characteristic(self, u) -> np.ndarray:
        """Σ_W P(W) e^{iuW}"""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return np.exp(1j * np.outer(u, self.work)) @ self.probs

    def jarzynski_average(self, beta: float) -> float:
        """⟨e^{-βW}⟩"""
        return float(np.dot(self.probs, np.exp(-beta * self.work)))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'W': self.work, 'prob': self.probs})


def sector_basis(spec: ChainSpec) -> np.ndarray:
    """Configurations de bits du secteur, triées"""
    states = np.arange(2 ** spec.N, dtype=np.int64)
    if spec.n_up is None:
        return states
    return states[_site_bits(states, spec.N).sum(axis=1) == spec.n_up]


def _site_bits(basis: np.ndarray, N: int) -> np.ndarray:
    return (basis[:, None] >> np.arange(N)) & 1


def hamiltonian_parts(spec: ChainSpec) -> Tuple[SpinOperator, SpinOperator]:
    """
    Parties XY et ZZ de H/J

    H_xy = Σ ½(S⁺_j S⁻_{j+1} + S⁻_j S⁺_{j+1}), H_zz = Σ S^z_j S^z_{j+1}
    """
    basis = sector_basis(spec)
    dim = len(basis)
    bits = _site_bits(basis, spec.N)
    sz = bits - 0.5

    diagonal = np.zeros(dim)
    rows, cols = [], []
    for i, j in spec.bonds:
        diagonal += sz[:, i] * sz[:, j]
        flippable = np.flatnonzero(bits[:, i] != bits[:, j])
        targets = basis[flippable] ^ ((1 << i) | (1 << j))
        rows.append(np.searchsorted(basis, targets))
        cols.append(flippable)

    rows = np.concatenate(rows) if rows else np.array([], dtype=int)
    cols = np.concatenate(cols) if cols else np.array([], dtype=int)
    h_xy = sparse.coo_matrix((np.full(len(rows), 0.5), (rows, cols)), shape=(dim, dim)).tocsr()
    h_zz = sparse.diags(diagonal, format='csr')
    return SpinOperator(h_xy, basis), SpinOperator(h_zz, basis)


def build_hamiltonian(spec: ChainSpec, delta: float, J: float = 1.0) -> SpinOperator:
    """
    H = J Σ_j [S^x_j S^x_{j+1} + S^y_j S^y_{j+1} + Δ S^z_j S^z_{j+1}] dans le secteur

    Args:
        spec (ChainSpec): Chaîne
        delta (float): Anisotropie Δ
        J (float): Couplage

    Returns:
        SpinOperator: Hamiltonien creux
    """
    h_xy, h_zz = hamiltonian_parts(spec)
    return SpinOperator(J * (h_xy.matrix + delta * h_zz.matrix), h_xy.basis)


def total_sz(spec: ChainSpec) -> SpinOperator:
    basis = sector_basis(spec)
    return SpinOperator(sparse.diags((_site_bits(basis, spec.N) - 0.5).sum(axis=1), format='csr'), basis)


def translation_operator(spec: ChainSpec) -> sparse.csr_matrix:
    """Matrice de permutation de la translation d'un site (j → j+1), chaîne périodique"""
    if not spec.pbc:
        raise DomainError("La translation requiert des conditions périodiques")
    basis = sector_basis(spec)
    mask = (1 << spec.N) - 1
    shifted = ((basis << 1) | (basis >> (spec.N - 1))) & mask
    rows = np.searchsorted(basis, shifted)
    cols = np.arange(len(basis))
    matrix = sparse.coo_matrix((np.ones(len(basis)), (rows, cols)), shape=(len(basis),) * 2).tocsr()
    return matrix


def _lowest_eigenpairs(H: SpinOperator) -> Tuple[np.ndarray, np.ndarray]:
    if H.dimension <= ED_CONFIG['dense_dimension']:
        return linalg.eigh(H.to_dense())
    k = min(ED_CONFIG['eigsh_vectors'], H.dimension - 2)
    try:
        energies, vectors = sparse_linalg.eigsh(H.matrix, k=k, which='SA')
    except sparse_linalg.ArpackNoConvergence as e:
        raise ConvergenceError(f"eigsh non convergé: {str(e)}") from e
    order = np.argsort(energies)
    return energies[order], vectors[:, order]


def _fix_phase(state: np.ndarray) -> np.ndarray:
    state = state / np.linalg.norm(state)
    pivot = state[np.argmax(np.abs(state))]
    return state * (abs(pivot) / pivot)


def ground_state(H: SpinOperator, spec: Optional[ChainSpec] = None) -> Tuple[float, np.ndarray]:
    """
    Paire propre la plus basse du secteur

    En cas de dégénérescence (chaîne périodique fournie), le représentant retenu est le vecteur
    propre de la translation dont la valeur propre e^{iK} a le plus petit |K|.

    Returns:
        tuple: (énergie, état normalisé, composante dominante réelle positive)
    """
    energies, vectors = _lowest_eigenpairs(H)
    e0 = float(energies[0])
    tol = ED_CONFIG['degeneracy_tol'] * max(1.0, abs(e0))
    degenerate = np.flatnonzero(energies - e0 < tol)

    if len(degenerate) > 1 and len(degenerate) == len(energies):
        logger.warning("⚠️  Dégénérescence non résolue par le solveur itératif")
    if len(degenerate) > 1 and spec is not None and spec.pbc:
        subspace = vectors[:, degenerate]
        projected = subspace.conj().T @ (translation_operator(spec) @ subspace)
        eigvals, coefficients = np.linalg.eig(projected)
        angles = np.angle(eigvals)
        choice = min(range(len(angles)), key=lambda i: (round(abs(angles[i]), 9), angles[i]))
        state = subspace @ coefficients[:, choice]
        logger.debug(f"Fondamental dégénéré ({len(degenerate)}×): impulsion K={angles[choice]:.4f}")
    else:
        state = vectors[:, 0].astype(complex)

    state = _fix_phase(state)
    residual = np.linalg.norm(H.matrix @ state - e0 * state)
    if residual > ED_CONFIG['residual_tol'] * max(H.norm(), 1.0):
        raise ConvergenceError(f"Résidu de l'état fondamental trop grand: {residual:.2e}")
    return e0, state


def _midpoint_product(parts: Tuple[SpinOperator, SpinOperator], p: QuenchProtocol,
                      states: np.ndarray, steps: int, dense: bool) -> np.ndarray:
    h_xy, h_zz = parts
    dt = p.tau_q / steps
    out = states.copy()
    for k in range(steps):
        delta = p.delta((k + 0.5) * dt)
        step_h = p.J * (h_xy.matrix + delta * h_zz.matrix)
        if dense:
            out = linalg.expm(-1j * dt * step_h.toarray()) @ out
        else:
            out = sparse_linalg.expm_multiply(-1j * dt * step_h.tocsc(), out)
    return out


def evolve(spec: ChainSpec, p: QuenchProtocol, steps: Optional[int] = None,
           initial: Optional[np.ndarray] = None, options: EdOptions = None) -> EvolutionResult:
    """
    U(τ_Q) ≈ Π_k exp(-i H(t_k + δt/2) δt) appliqué aux colonnes de initial

    Le nombre de pas est doublé jusqu'à ce que max‖ψ_{2n} - ψ_n‖ < state_tol.

    Args:
        spec (ChainSpec): Chaîne
        p (QuenchProtocol): Protocole
        steps (int): Nombre de pas initial (défaut: max(64, 8Jτ_Q))
        initial (np.ndarray): État(s) initial(aux), défaut: fondamental de H(0)
        options (EdOptions): Paramètres d'évolution

    Returns:
        EvolutionResult: États finaux, nombre de pas retenu, dernier écart
    """
    options = options or EdOptions()
    parts = hamiltonian_parts(spec)

    if initial is None:
        _, initial = ground_state(build_hamiltonian(spec, 0.0, p.J), spec)
    states = np.asarray(initial, dtype=complex)
    single = states.ndim == 1
    if single:
        states = states[:, None]
    if states.shape[0] != parts[0].dimension:
        raise DomainError("Dimension de l'état initial incompatible avec le secteur")

    if p.tau_q == 0:
        return EvolutionResult(states[:, 0] if single else states, 0, 0.0)

    if steps is None:
        steps = max(options.initial_steps, math.ceil(options.steps_per_unit_time * p.J * p.tau_q))
    if steps < 1:
        raise DomainError("steps doit être ≥ 1")

    dense = parts[0].dimension <= options.dense_expm_dimension
    current = _midpoint_product(parts, p, states, steps, dense)
    change = math.inf
    for _ in range(options.max_doublings):
        steps *= 2
        refined = _midpoint_product(parts, p, states, steps, dense)
        change = float(np.max(np.linalg.norm(refined - current, axis=0)))
        current = refined
        logger.debug(f"Évolution: {steps} pas, écart {change:.2e}")
        if change < options.state_tol:
            return EvolutionResult(current[:, 0] if single else current, steps, change)

    raise ConvergenceError(f"Doublement des pas non convergé ({steps} pas, écart {change:.2e})")


def _transitions(spec: ChainSpec, p: QuenchProtocol,
                 options: EdOptions = None) -> Tuple[np.ndarray, np.ndarray]:
    """Couples (W = ε_n^τ - ε_m⁰, probabilité) non fusionnés"""
    if spec.N > ED_CONFIG['max_full_spectrum_sites']:
        raise DomainError(f"Spectres complets limités à N ≤ {ED_CONFIG['max_full_spectrum_sites']}")

    h_initial = build_hamiltonian(spec, 0.0, p.J)
    h_final = build_hamiltonian(spec, p.delta_f, p.J)
    energies_f, vectors_f = linalg.eigh(h_final.to_dense())

    if p.is_ground_state:
        e0, psi0 = ground_state(h_initial, spec)
        energies_i, columns, weights = np.array([e0]), psi0[:, None], np.ones(1)
    else:
        energies_i, columns = linalg.eigh(h_initial.to_dense())
        weights = np.exp(-p.beta * (energies_i - energies_i[0]))
        weights /= weights.sum()

    evolved = evolve(spec, p, initial=columns.astype(complex), options=options).states
    amplitudes = vectors_f.conj().T @ evolved
    probs = np.abs(amplitudes) ** 2 * weights[None, :]
    work = energies_f[:, None] - energies_i[None, :]

    total = probs.sum()
    if abs(total - 1.0) > 1e-8:
        raise ConvergenceError(f"Perte d'unitarité: Σ P = {total:.12g}")
    return work.ravel(), probs.ravel() / total


def _protocol_meta(spec: ChainSpec, p: QuenchProtocol) -> Dict[str, Any]:
    return {'protocol': p.to_dict(), 'N': spec.N, 'pbc': spec.pbc, 'sector': spec.sector}


def work_distribution(spec: ChainSpec, p: QuenchProtocol, options: EdOptions = None) -> WorkDistribution:
    """
    P(W) = Σ_{m,n} ρ_m |⟨ε_n^τ|U|ε_m⁰⟩|² δ(W - (ε_n^τ - ε_m⁰))

    Les valeurs de W distantes de moins de merge_tol·J sont fusionnées.
    """
    options = options or EdOptions()
    work, probs = _transitions(spec, p, options)
    order = np.argsort(work, kind='stable')
    work, probs = work[order], probs[order]

    # Regroupement des W quasi dégénérés
    group = np.concatenate([[0], np.cumsum(np.diff(work) > options.merge_tol * p.J)])
    merged_probs = np.bincount(group, weights=probs)
    merged_work = np.bincount(group, weights=work * probs) / np.where(merged_probs > 0, merged_probs, 1.0)
    empty = merged_probs <= 0
    if np.any(empty):
        first = np.searchsorted(group, np.flatnonzero(empty))
        merged_work[empty] = work[first]

    logger.debug(f"P(W): {len(work)} transitions, {len(merged_work)} valeurs distinctes")
    return WorkDistribution(work=merged_work, probs=merged_probs, meta=_protocol_meta(spec, p))


def cfw_ed(spec: ChainSpec, p: QuenchProtocol, u_grid, options: EdOptions = None) -> CfwCurve:
    """
    G(u) = Tr(U† e^{iuH_τ} U e^{-iuH₀} ρ₀) par décomposition spectrale

    ρ₀ est le fondamental (β = ∞) ou l'état thermique du secteur.
    """
    u = np.asarray(u_grid, dtype=float)
    work, probs = _transitions(spec, p, options)
    values = np.exp(1j * np.outer(u, work)) @ probs
    values[u == 0.0] = 1.0
    return CfwCurve(u_grid=u, values=values, source='ed', meta=_protocol_meta(spec, p))


def sector_partition_ratio(spec: ChainSpec, p: QuenchProtocol) -> float:
    """Z_τ/Z₀ restreint au secteur"""
    if p.is_ground_state or p.beta <= 0:
        raise DomainError("Rapport de fonctions de partition défini pour 0 < β < ∞")
    energies_i = linalg.eigvalsh(build_hamiltonian(spec, 0.0, p.J).to_dense())
    energies_f = linalg.eigvalsh(build_hamiltonian(spec, p.delta_f, p.J).to_dense())
    shift = energies_f[0] - energies_i[0]
    log_ratio = (-p.beta * shift
                 + np.log(np.sum(np.exp(-p.beta * (energies_f - energies_f[0]))))
                 - np.log(np.sum(np.exp(-p.beta * (energies_i - energies_i[0])))))
    return float(np.exp(log_ratio))


def save_golden(path: Union[str, Path], spec: ChainSpec, p: QuenchProtocol,
                cumulants: CumulantSet, curve: Optional[CfwCurve] = None) -> Path:
    """Enregistrement de référence {N, delta_f, tau_q, beta, kappas, G_samples}"""
    record = {
        'N': spec.N,
        'delta_f': p.delta_f,
        'tau_q': p.tau_q,
        'beta': 'inf' if p.is_ground_state else p.beta,
        'kappas': list(cumulants.kappas),
        'G_samples': [] if curve is None else [
            [float(u), float(g.real), float(g.imag)] for u, g in zip(curve.u_grid, curve.values)
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(record, f, indent=2)
    logger.info(f"💾 Référence sauvegardée dans {path}")
    return path


def load_golden(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        record = json.load(f)
    record['beta'] = math.inf if record['beta'] == 'inf' else float(record['beta'])
    record['G_samples'] = np.array(record['G_samples'], dtype=float).reshape(-1, 3)
    return record
