"""
Fonctions d'Airy Ai, Ai', Bi, Bi' à argument complexe

Série de Maclaurin pour |z| petit, développement asymptotique pour |z| grand.
Dans la couronne intermédiaire les deux évaluations sont faites et la plus
précise (erreur estimée) est conservée.
"""

import cmath
import logging
import math
from typing import Tuple

import numpy as np
from scipy.special import gamma

from config import AIRY_CONFIG
from errors import PrecisionLossError

logger = logging.getLogger(__name__)

# Valeurs à l'origine
AI0 = 3.0 ** (-2.0 / 3.0) / gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / gamma(1.0 / 3.0)
BI0 = 3.0 ** (-1.0 / 6.0) / gamma(2.0 / 3.0)
BIP0 = 3.0 ** (1.0 / 6.0) / gamma(1.0 / 3.0)

_EPS = float(np.finfo(float).eps)
_SQRT_PI = math.sqrt(math.pi)
_SQRT3 = math.sqrt(3.0)
_OMEGA = cmath.exp(2j * math.pi / 3.0)
_STOKES_ARG = 2.0 * math.pi / 3.0


def _asymptotic_coefficients(n_terms: int) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients u_k, v_k du développement asymptotique"""
    u = np.empty(n_terms)
    v = np.empty(n_terms)
    u[0] = v[0] = 1.0
    for k in range(1, n_terms):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v[k] = -(6 * k + 1) / (6 * k - 1) * u[k]
    return u, v


_U, _V = _asymptotic_coefficients(AIRY_CONFIG['asymptotic_terms'])


def _series(z: complex, n_terms: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Série de Maclaurin: Ai = c1 f - c2 g, Bi = √3 (c1 f + c2 g)

    Returns:
        tuple: valeurs (Ai, Ai', Bi, Bi') et erreurs absolues estimées
    """
    c1 = AI0
    c2 = -AIP0
    z3 = z * z * z

    t, s, w = 1.0 + 0j, z, 1.0 + 0j  # termes de f, g et g'
    du = 0j  # termes de f'
    f, g, fp, gp = t, s, 0j, w
    abs_f, abs_g, abs_fp, abs_gp = abs(t), abs(s), 0.0, abs(w)

    for k in range(1, n_terms):
        t *= z3 / ((3 * k - 1) * (3 * k))
        s *= z3 / ((3 * k) * (3 * k + 1))
        w *= z3 / ((3 * k) * (3 * k - 2))
        du = z * z / 2.0 if k == 1 else du * z3 / ((3 * k - 1) * (3 * k - 3))

        f += t
        g += s
        fp += du
        gp += w
        abs_f += abs(t)
        abs_g += abs(s)
        abs_fp += abs(du)
        abs_gp += abs(w)

        if abs(t) + abs(s) + abs(du) + abs(w) < 1e-3 * _EPS * (abs_f + abs_g + abs_fp + abs_gp):
            break

    values = np.array([
        c1 * f - c2 * g,
        c1 * fp - c2 * gp,
        _SQRT3 * (c1 * f + c2 * g),
        _SQRT3 * (c1 * fp + c2 * gp),
    ])
    errors = 4.0 * _EPS * np.array([
        c1 * abs_f + c2 * abs_g,
        c1 * abs_fp + c2 * abs_gp,
        _SQRT3 * (c1 * abs_f + c2 * abs_g),
        _SQRT3 * (c1 * abs_fp + c2 * abs_gp),
    ])
    return values, errors


def _optimal_truncation(magnitudes: np.ndarray) -> int:
    """Indice du plus petit terme (troncature optimale d'une série divergente)"""
    return int(np.argmin(magnitudes[1:])) + 1


def _ai_asymptotic(z: complex) -> Tuple[complex, complex, float, float]:
    """Ai(z), Ai'(z) asymptotiques et leurs erreurs absolues"""
    k = np.arange(len(_U))

    if abs(cmath.phase(z)) <= _STOKES_ARG:
        zeta = 2.0 / 3.0 * z ** 1.5
        z14 = z ** 0.25
        damping = cmath.exp(-zeta)
        powers = (-1.0 / zeta) ** k

        terms_u = _U * powers
        terms_v = _V * powers
        cut_u = _optimal_truncation(np.abs(terms_u))
        cut_v = _optimal_truncation(np.abs(terms_v))

        pref_ai = damping / (2.0 * _SQRT_PI * z14)
        pref_aip = -z14 * damping / (2.0 * _SQRT_PI)
        ai = pref_ai * terms_u[:cut_u].sum()
        aip = pref_aip * terms_v[:cut_v].sum()
        return ai, aip, abs(pref_ai) * abs(terms_u[cut_u]), abs(pref_aip) * abs(terms_v[cut_v])

    # Secteur oscillant: z = -w avec |arg w| < π/3
    w = -z
    zeta = 2.0 / 3.0 * w ** 1.5
    w14 = w ** 0.25
    cos_z = cmath.cos(zeta - math.pi / 4.0)
    sin_z = cmath.sin(zeta - math.pi / 4.0)
    signs = np.where((k // 2) % 2 == 0, 1.0, -1.0)
    powers = zeta ** (-k.astype(float))
    even = (k % 2) == 0

    terms_u = signs * _U * powers
    terms_v = signs * _V * powers
    cut_u = _optimal_truncation(np.abs(terms_u))
    cut_v = _optimal_truncation(np.abs(terms_v))
    keep_u = k < cut_u
    keep_v = k < cut_v

    even_u = terms_u[keep_u & even].sum()
    odd_u = terms_u[keep_u & ~even].sum()
    even_v = terms_v[keep_v & even].sum()
    odd_v = terms_v[keep_v & ~even].sum()

    pref_ai = 1.0 / (_SQRT_PI * w14)
    pref_aip = w14 / _SQRT_PI
    ai = pref_ai * (cos_z * even_u + sin_z * odd_u)
    aip = pref_aip * (sin_z * even_v - cos_z * odd_v)
    spread = abs(cos_z) + abs(sin_z)
    return (ai, aip,
            abs(pref_ai) * spread * abs(terms_u[cut_u]),
            abs(pref_aip) * spread * abs(terms_v[cut_v]))


def _asymptotic(z: complex) -> Tuple[np.ndarray, np.ndarray]:
    """Développement asymptotique; Bi obtenu par la formule de connexion"""
    ai, aip, err_ai, err_aip = _ai_asymptotic(z)
    ai_p, aip_p, err_ai_p, err_aip_p = _ai_asymptotic(z * _OMEGA)
    ai_m, aip_m, err_ai_m, err_aip_m = _ai_asymptotic(z * _OMEGA.conjugate())

    # Bi(z) = e^{iπ/6} Ai(zω) + e^{-iπ/6} Ai(zω̄)
    phase_b = cmath.exp(1j * math.pi / 6.0)
    phase_bp = cmath.exp(5j * math.pi / 6.0)
    bi = phase_b * ai_p + phase_b.conjugate() * ai_m
    bip = phase_bp * aip_p + phase_bp.conjugate() * aip_m

    values = np.array([ai, aip, bi, bip])
    errors = np.array([err_ai, err_aip, err_ai_p + err_ai_m, err_aip_p + err_aip_m])
    return values, errors


def _envelope(z: complex) -> np.ndarray:
    """Échelle naturelle de Ai, Ai', Bi, Bi' (module sur les directions anti-Stokes)"""
    r = max(abs(z), 1.0)
    low = r ** -0.25 / (2.0 * _SQRT_PI)
    high = r ** 0.25 / (2.0 * _SQRT_PI)
    return np.array([low, high, low, high])


def _relative_error(values: np.ndarray, errors: np.ndarray, z: complex) -> float:
    scale = np.maximum(np.abs(values), _envelope(z))
    return float(np.max(errors / scale))


def airy_scalar(z: complex, precision: float = None) -> Tuple[complex, complex, complex, complex]:
    """
    Évalue (Ai, Ai', Bi, Bi') en un point complexe

    Args:
        z (complex): Argument
        precision (float): Erreur relative maximale tolérée

    Returns:
        tuple: (Ai(z), Ai'(z), Bi(z), Bi'(z))
    """
    precision = AIRY_CONFIG['precision'] if precision is None else precision
    z = complex(z)
    radius = abs(z)

    candidates = []
    if radius <= AIRY_CONFIG['outer_radius']:
        candidates.append(('série', _series(z, AIRY_CONFIG['series_terms'])))
    if radius >= AIRY_CONFIG['inner_radius']:
        candidates.append(('asymptotique', _asymptotic(z)))

    scored = [(_relative_error(vals, errs, z), name, vals) for name, (vals, errs) in candidates]
    error, name, values = min(scored, key=lambda item: item[0])

    if not error <= precision:
        raise PrecisionLossError(
            f"Fonctions d'Airy imprécises en z={z:.6g}: erreur estimée {error:.2e} ({name})"
        )
    logger.debug(f"Airy z={z:.4g}: branche {name}, erreur {error:.1e}")
    return complex(values[0]), complex(values[1]), complex(values[2]), complex(values[3])


def airy_functions(z, precision: float = None):
    """
    Version vectorisée de airy_scalar

    Returns:
        tuple: tableaux (Ai, Ai', Bi, Bi') de même forme que z
    """
    z_arr = np.asarray(z, dtype=complex)
    out = np.empty((4,) + z_arr.shape, dtype=complex)
    for index, value in np.ndenumerate(z_arr):
        out[(slice(None),) + index] = airy_scalar(value, precision)
    if z_arr.ndim == 0:
        return tuple(complex(x) for x in out)
    return out[0], out[1], out[2], out[3]
