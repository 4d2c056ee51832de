"""
Statistiques de travail quantique d'une trempe de durée finie dans la chaîne XXZ
Description: Calcul analytique (liquide de Luttinger), diagonalisation exacte et oracle de Fock
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config import (CUTOFF_PRESETS, ED_CONFIG, EXIT_CODES, LOGGING_CONFIG, MESSAGES, ORACLE_CONFIG,
                    OUTPUT_CONFIG, PROTOCOL_CONFIG, SWEEP_CONFIG)
from errors import DomainError, NumericalToleranceError
from fock_oracle import gq_formula, gq_oracle, cfw_forms, trace_formula_check
from luttinger import QuenchProtocol, luttinger_params, pq_asymptotic, save_modes_json, solve_modes
from scaling_analysis import ScalingAnalyzer
from sweeps import (SweepCollector, SweepSpec, adiabatic_references, ed_adiabatic_references,
                    oscillation_period)
from workstats import (CfwCurve, cfw_ground, cfw_thermal, cumulant_integrals_ground, cumulants_frame,
                       cumulants_from_cfw, cumulants_thermal, stencil_grid, write_csv)
from xxz_ed import ChainSpec, cfw_ed, sector_partition_ratio, work_distribution

logger = logging.getLogger(__name__)

COMMANDS = ('params', 'modes', 'cfw', 'cumulants', 'sweep', 'ed', 'oracle')


@dataclass
class RunConfig:
    """
    Paramètres d'une exécution (document JSON, surchargé par les options de la ligne de commande)
    """
    command: str = 'params'
    J: float = PROTOCOL_CONFIG['J']
    delta: float = 0.0
    delta_f: float = PROTOCOL_CONFIG['delta_f']
    tau_q: float = PROTOCOL_CONFIG['tau_q']
    beta: float = PROTOCOL_CONFIG['beta']
    N: int = 12
    alpha: Optional[float] = None
    preset: str = 'fig1_main'
    u_min: float = -1.0
    u_max: float = 1.0
    u_points: int = 201
    q_values: List[float] = field(default_factory=lambda: [0.05, 0.1, 0.2, 0.5])
    u_values: List[float] = field(default_factory=lambda: [0.0, 0.5, 1.5])
    beta_values: List[float] = field(default_factory=lambda: [10.0, 20.0, 40.0])
    sweep: Dict = field(default_factory=lambda: {'min': 10.0, 'max': 1000.0, 'points': 12})
    branch: str = 'slow'
    source: Optional[str] = None
    method: str = 'analytic-integral'
    mode_set: str = 'continuum'
    convention: str = 'bosonic'
    n_max: int = ORACLE_CONFIG['n_max']
    trace_check: bool = False
    workers: int = SWEEP_CONFIG['workers']
    out: Optional[str] = None

    @classmethod
    def from_sources(cls, args: argparse.Namespace) -> 'RunConfig':
        """Charge le JSON de --config puis applique les options explicites"""
        data = {}
        if getattr(args, 'config', None):
            try:
                with open(args.config, 'r', encoding='utf-8') as f:
                    data = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                raise DomainError(f"Configuration illisible {args.config}: {str(e)}") from e
            if not isinstance(data, dict):
                raise DomainError("La configuration doit être un objet JSON")

        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"Champs de configuration inconnus: {sorted(unknown)}")

        for name in known:
            value = getattr(args, name, None)
            if value is not None:
                data[name] = value
        for bound, key in (('tau_min', 'min'), ('tau_max', 'max'), ('points', 'points')):
            value = getattr(args, bound, None)
            if value is not None:
                data.setdefault('sweep', dict(cls().sweep))
                data['sweep'] = dict(data['sweep'], **{key: value})

        if isinstance(data.get('beta'), str):
            data['beta'] = float(data['beta'])
        config = cls(**data)
        config.validate()
        return config

    def validate(self):
        if self.command not in COMMANDS:
            raise DomainError(f"Commande inconnue: {self.command}")
        if self.N < 2 or self.N % 2:
            raise DomainError(f"N doit être pair et ≥ 2 (reçu {self.N})")
        if self.u_points < 1 or self.u_max < self.u_min:
            raise DomainError("Grille u invalide")
        if self.branch not in ('fast', 'slow'):
            raise DomainError(f"Branche inconnue: {self.branch}")
        if self.source not in (None, 'analytic', 'ed'):
            raise DomainError(f"Source inconnue: {self.source}")
        if self.alpha is None and self.preset not in CUTOFF_PRESETS:
            raise DomainError(f"Préréglage de coupure inconnu: {self.preset}")
        if self.workers < 1:
            raise DomainError("workers doit être ≥ 1")

    @property
    def cutoff(self) -> float:
        return self.alpha if self.alpha is not None else CUTOFF_PRESETS[self.preset]

    def protocol(self, **overrides) -> QuenchProtocol:
        values = {'J': self.J, 'delta_f': self.delta_f, 'tau_q': self.tau_q, 'beta': self.beta}
        values.update(overrides)
        return QuenchProtocol(**values)

    def u_grid(self) -> np.ndarray:
        if self.u_points == 1:
            return np.array([self.u_min])
        return np.linspace(self.u_min, self.u_max, self.u_points)

    def output_path(self, default_name: str) -> Optional[str]:
        if self.out == '-':
            return None
        return self.out or str(Path(OUTPUT_CONFIG['output_dir']) / default_name)

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['beta'] = 'inf' if math.isinf(self.beta) else self.beta
        return data


def _emit(frame: pd.DataFrame, path: Optional[str]):
    """Écrit un tableau CSV dans un fichier ou sur la sortie standard"""
    if path is None:
        frame.to_csv(sys.stdout, index=False, float_format=OUTPUT_CONFIG['float_format'],
                     lineterminator=OUTPUT_CONFIG['line_terminator'])
    else:
        write_csv(frame, path)


class QuenchWorkStudy:
    """Classe principale pour orchestrer les calculs de statistiques de travail"""

    def __init__(self, config: RunConfig):
        """
        Initialise l'étude

        Args:
            config (RunConfig): Paramètres de l'exécution
        """
        self.config = config
        self.results = {}

    def run(self):
        """Exécute la commande demandée"""
        try:
            logger.info(MESSAGES['start'])
            handler = getattr(self, f'cmd_{self.config.command}')
            handler()
            logger.info(MESSAGES['end'])
        except (DomainError, NumericalToleranceError):
            raise
        except Exception as e:
            logger.error(f"❌ Erreur lors du calcul: {str(e)}", exc_info=True)
            raise
        return self.results

    def cmd_params(self):
        """Affiche v/J et K pour une anisotropie Δ"""
        params = luttinger_params(self.config.delta, self.config.J)
        line = f"v/J={params.v / self.config.J:.12g} K={params.K:.12g}"
        print(line)
        self.results['params'] = params

    def cmd_modes(self):
        """Résout l'équation de mode pour chaque q et compare à p₀ sinc²"""
        logger.info(MESSAGES['modes'])
        p = self.config.protocol()
        modes = solve_modes(self.config.q_values, p)
        for mode in modes:
            logger.info(f"   ✓ q={mode.q:.4g}: p_q={mode.p_q:.6e} (asymptotique {pq_asymptotic(mode.q, p):.6e})")
        path = self.config.output_path('modes.json')
        if path is None:
            print(json.dumps([mode.to_record() for mode in modes], indent=2))
        else:
            save_modes_json(modes, path)
        self.results['modes'] = modes

    def _curve(self, p: QuenchProtocol) -> CfwCurve:
        cfg = self.config
        u = cfg.u_grid()
        if (cfg.source or 'analytic') == 'ed':
            return cfw_ed(ChainSpec(cfg.N), p, u)
        if p.is_ground_state:
            return cfw_ground(u, p, cfg.N, cfg.cutoff, mode_set=cfg.mode_set, convention=cfg.convention)
        return cfw_thermal(u, p, cfg.N, cfg.cutoff, mode_set=cfg.mode_set, convention=cfg.convention)

    def cmd_cfw(self):
        """Écrit (u, Re G, Im G) pour la source choisie"""
        logger.info(MESSAGES['cfw'])
        curve = self._curve(self.config.protocol())
        if curve.is_symmetric:
            logger.info(f"   ✓ Défaut hermitien max|G(-u) - G(u)*| = {curve.hermitian_defect():.2e}")
        logger.info(f"   ✓ Défaut de borne max(|G| - 1, 0) = {curve.bound_defect():.2e}")
        _emit(curve.to_frame(), self.config.output_path(f'cfw_{curve.source}.csv'))
        self.results['cfw'] = curve

    def cmd_cumulants(self):
        """Cumulants au protocole courant"""
        logger.info(MESSAGES['cumulants'])
        cfg = self.config
        p = cfg.protocol()
        source = cfg.source or 'analytic'

        if source == 'ed':
            cumulants = work_distribution(ChainSpec(cfg.N), p).cumulants(3)
        elif not p.is_ground_state:
            cumulants = cumulants_thermal(p, cfg.cutoff, cfg.N, convention=cfg.convention, mode_set=cfg.mode_set)
        elif cfg.method == 'finite-difference':
            curve = cfw_ground(stencil_grid(cfg.N, p.J), p, cfg.N, cfg.cutoff,
                               mode_set=cfg.mode_set, convention=cfg.convention)
            cumulants = cumulants_from_cfw(curve, 3)
        else:
            cumulants = cumulant_integrals_ground(p, cfg.cutoff, cfg.N, cfg.convention)

        for n, kappa in enumerate(cumulants.kappas, start=1):
            logger.info(f"   ✓ κ{n} = {kappa:.10g}")
        _emit(cumulants_frame([(p.tau_q, cumulants)], source), cfg.output_path('cumulants.csv'))
        self.results['cumulants'] = cumulants

    def cmd_sweep(self):
        """Balayage en τ_Q, renormalisation et ajustement des exposants"""
        logger.info(MESSAGES['sweep'])
        cfg = self.config
        sweep = SweepSpec.from_dict(dict(cfg.sweep, include_zero=cfg.branch == 'fast'))
        sources = [cfg.source] if cfg.source else ['analytic', 'ed']
        if 'ed' in sources and cfg.N > ED_CONFIG['max_full_spectrum_sites']:
            raise DomainError(f"La source ED requiert N ≤ {ED_CONFIG['max_full_spectrum_sites']}")

        base = cfg.protocol()
        collector = SweepCollector(base, sweep.values(), cfg.N, cfg.cutoff, cfg.workers, cfg.convention)
        data = collector.collect_all(sources, cfg.method)

        references, envelopes = {}, {}
        if cfg.branch == 'slow' and base.is_ground_state and 'analytic' in sources:
            references.update(adiabatic_references(base, cfg.N, cfg.cutoff))
        if cfg.branch == 'slow' and 'ed' in sources:
            envelopes['ed'] = oscillation_period(cfg.N, base.J)
            if base.is_ground_state:
                references.update(ed_adiabatic_references(base, cfg.N))
        analyzer = ScalingAnalyzer(data, cfg.branch, references, envelopes)
        fits = analyzer.fit_all()

        path = cfg.output_path('sweep.csv')
        _emit(data, path)
        fits_path = Path(path).with_suffix('.fits.json') if path else None
        payload = {key: fit.to_dict() for key, fit in fits.items()}
        if fits_path is None:
            logger.info(json.dumps(payload, indent=2))
        else:
            fits_path.write_text(json.dumps(payload, indent=2) + '\n', encoding='utf-8')
            logger.info(f"💾 Ajustements sauvegardés dans {fits_path}")
        self.results.update({'sweep': data, 'fits': fits})

    def cmd_ed(self):
        """Distribution P(W) et vérification de Jarzynski"""
        logger.info(MESSAGES['ed'])
        cfg = self.config
        spec = ChainSpec(cfg.N)
        p = cfg.protocol()
        distribution = work_distribution(spec, p)
        cumulants = distribution.cumulants(3)
        logger.info(f"   ✓ {len(distribution.work)} valeurs de W, κ₁ = {cumulants.kappa(1):.10g}")

        if not p.is_ground_state:
            average = distribution.jarzynski_average(p.beta)
            ratio = sector_partition_ratio(spec, p)
            logger.info(f"   ✓ Jarzynski: ⟨e^(-βW)⟩ = {average:.12g}, Z_τ/Z₀ = {ratio:.12g}")
            self.results['jarzynski'] = (average, ratio)

        _emit(distribution.to_frame(), cfg.output_path('work_distribution.csv'))
        self.results.update({'distribution': distribution, 'cumulants': cumulants})

    def cmd_oracle(self):
        """Compare g_q(u) à la trace dans l'espace de Fock tronqué sur une grille (q, u, β)"""
        logger.info(MESSAGES['oracle'])
        cfg = self.config
        rows = []
        for beta in cfg.beta_values:
            p = cfg.protocol(beta=beta)
            for mode in solve_modes(cfg.q_values, p):
                for u in cfg.u_values:
                    oracle = gq_oracle(mode.q, p, mode, u, cfg.n_max)
                    formula = gq_formula(mode.q, p, mode, u)
                    row = {'q': mode.q, 'u': u, 'beta': beta,
                           'deviation': abs(oracle - formula) / abs(formula)}
                    if cfg.trace_check:
                        check = trace_formula_check(cfw_forms(mode.q, p, mode, u), 2, cfg.n_max)
                        row['trace_deviation'] = check.relative_deviation
                    rows.append(row)

        report = pd.DataFrame(rows)
        worst = float(report.drop(columns=['q', 'u', 'beta']).max().max())
        logger.info(f"   ✓ Écart relatif maximal: {worst:.3e} sur {len(report)} points")
        _emit(report, cfg.output_path('oracle.csv'))
        self.results.update({'oracle': report, 'max_deviation': worst})
        if worst > ORACLE_CONFIG['trace_tol']:
            raise NumericalToleranceError(f"Écart oracle/formule {worst:.3e} > {ORACLE_CONFIG['trace_tol']:.0e}")


def build_parser() -> argparse.ArgumentParser:
    """Analyseur de la ligne de commande (sous-commandes et options communes)"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="Document JSON de configuration")
    common.add_argument('--out', help="Fichier de sortie ('-' pour la sortie standard)")
    common.add_argument('--source', choices=['analytic', 'ed'])
    common.add_argument('--workers', type=int)
    common.add_argument('--alpha', type=float, help="Coupure UV α")
    common.add_argument('--preset', choices=sorted(CUTOFF_PRESETS), help="Coupure α prédéfinie")
    common.add_argument('--n', dest='N', type=int, help="Nombre de sites")
    common.add_argument('--beta', type=float, help="Température inverse (inf: état fondamental)")
    common.add_argument('--J', type=float)
    common.add_argument('--delta-f', dest='delta_f', type=float)
    common.add_argument('--tau-q', dest='tau_q', type=float)
    common.add_argument('--u-min', dest='u_min', type=float)
    common.add_argument('--u-max', dest='u_max', type=float)
    common.add_argument('--u-points', dest='u_points', type=int)
    common.add_argument('--mode-set', dest='mode_set', choices=['continuum', 'discrete'])
    common.add_argument('--convention', choices=['bosonic', 'printed'])
    common.add_argument('--verbose', action='store_true')

    parser = argparse.ArgumentParser(prog='workstats', description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest='command', required=True)

    params = sub.add_parser('params', parents=[common], help="Paramètres de Luttinger v/J et K")
    params.add_argument('delta', type=float, nargs='?', help="Anisotropie Δ")

    modes = sub.add_parser('modes', parents=[common], help="Solutions de l'équation de mode")
    modes.add_argument('--q', dest='q_values', type=float, nargs='+')

    sub.add_parser('cfw', parents=[common], help="Fonction caractéristique du travail")

    cumulants = sub.add_parser('cumulants', parents=[common], help="Cumulants du travail")
    cumulants.add_argument('--method', choices=['analytic-integral', 'finite-difference'])

    sweep = sub.add_parser('sweep', parents=[common], help="Balayage en τ_Q et lois d'échelle")
    sweep.add_argument('--tau-min', dest='tau_min', type=float)
    sweep.add_argument('--tau-max', dest='tau_max', type=float)
    sweep.add_argument('--points', type=int)
    sweep.add_argument('--branch', choices=['fast', 'slow'])
    sweep.add_argument('--method', choices=['analytic-integral', 'finite-difference'])

    sub.add_parser('ed', parents=[common], help="Distribution du travail par diagonalisation exacte")

    oracle = sub.add_parser('oracle', parents=[common], help="Oracle dans l'espace de Fock tronqué")
    oracle.add_argument('--q', dest='q_values', type=float, nargs='+')
    oracle.add_argument('--u', dest='u_values', type=float, nargs='+')
    oracle.add_argument('--betas', dest='beta_values', type=float, nargs='+')
    oracle.add_argument('--n-max', dest='n_max', type=int)
    oracle.add_argument('--trace-check', dest='trace_check', action='store_true', default=None)
    return parser


def setup_logging(verbose: bool = False):
    """Console (stderr) et fichier journal"""
    log_file = Path(LOGGING_CONFIG['log_file'])
    log_file.parent.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, LOGGING_CONFIG['log_level']),
        format=LOGGING_CONFIG['log_format'],
        handlers=[
            logging.FileHandler(log_file, encoding='utf-8'),
            logging.StreamHandler(sys.stderr)
        ]
    )


def main(argv: Sequence[str] = None) -> int:
    """Point d'entrée principal du programme"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CODES['success'] if e.code == 0 else EXIT_CODES['usage']

    setup_logging(args.verbose)
    try:
        config = RunConfig.from_sources(args)
        study = QuenchWorkStudy(config)
        study.run()
        return EXIT_CODES['success']

    except DomainError as e:
        logger.error(f"❌ Paramètre invalide: {str(e)}")
        return EXIT_CODES['usage']
    except NumericalToleranceError as e:
        logger.error(f"❌ Tolérance numérique non atteinte: {str(e)}")
        return EXIT_CODES['tolerance']
    except KeyboardInterrupt:
        logger.warning("\n⚠️ Calcul interrompu par l'utilisateur")
        return EXIT_CODES['interrupted']
    except Exception as e:
        logger.error(f"\n❌ Erreur fatale: {str(e)}", exc_info=True)
        return EXIT_CODES['interrupted']


if __name__ == "__main__":
    sys.exit(main())
