"""
Exceptions du projet
"""


class WorkStatsError(Exception):
    """Erreur de base du projet"""


class DomainError(WorkStatsError, ValueError):
    """Paramètre hors du domaine de validité (code de sortie 2)"""


class NumericalToleranceError(WorkStatsError, ArithmeticError):
    """Tolérance numérique non atteinte (code de sortie 3)"""


class SolverError(NumericalToleranceError):
    """Échec de l'intégrateur d'équation différentielle"""


class PrecisionLossError(NumericalToleranceError):
    """Précision insuffisante dans l'évaluation d'une fonction spéciale"""


class QuadratureError(NumericalToleranceError):
    """Quadrature non convergée ou queue d'intégrale trop grande"""


class PoleProximityError(NumericalToleranceError):
    """Dénominateur de g_q(u) trop proche de zéro"""

    def __init__(self, q: float, u: complex, denominator: float):
        self.q = q
        self.u = u
        self.denominator = denominator
        super().__init__(
            f"Pôle de g_q(u) atteint: q={q:.6g}, u={u:.6g}, |dénominateur|={denominator:.3e}"
        )


class PhaseUnwrapError(NumericalToleranceError):
    """Saut de phase ambigu entre deux échantillons de la grille"""


class ConvergenceError(NumericalToleranceError):
    """Procédure itérative non convergée"""


class TruncationError(NumericalToleranceError):
    """Troncature de l'espace de Fock insuffisante"""


class ImaginaryResidueError(NumericalToleranceError):
    """Cumulant extrait avec une partie imaginaire au-delà du bruit d'arrondi"""
