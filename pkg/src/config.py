"""
Fichier de configuration pour le calcul des statistiques de travail quantique
"""

# Protocole de trempe par défaut (unités : J = 1)
PROTOCOL_CONFIG = {
    'J': 1.0,
    'delta_f': 0.1,  # Anisotropie finale Δ_f
    'tau_q': 10.0,  # Durée de la trempe τ_Q (en 1/J)
    'beta': float('inf')  # β = ∞ : trempe depuis l'état fondamental
}

# Intégration de l'équation de mode (paire Runge-Kutta emboîtée)
SOLVER_CONFIG = {
    'method': 'DOP853',
    'abs_tol': 1e-12,
    'rel_tol': 1e-10,
    'max_steps': 200000,
    'constraint_tol': 1e-6,  # Contrainte canonique |x1|² - |x2|² = 1
    'velocity_model': 'bethe_ansatz'
}

# Fonctions d'Airy à argument complexe
AIRY_CONFIG = {
    'inner_radius': 4.5,  # En dessous : série de Maclaurin seule
    'outer_radius': 7.0,  # Au-dessus : développement asymptotique seul
    'series_terms': 80,
    'asymptotic_terms': 60,
    'precision': 1e-8
}

# Quadratures sur les modes
QUADRATURE_CONFIG = {
    'span_factor': 40.0,  # Q_max = 40·max(1/α, 1/(Jτ_Q))
    'epsabs': 1e-14,
    'epsrel': 1e-10,
    'limit': 20000,
    'max_breakpoints': 4000,
    'tail_tol': 1e-10,
    'pole_tol': 1e-12
}

# Différences finies pour l'extraction des cumulants
STENCIL_CONFIG = {
    'half_width': 4,  # Stencil central à 9 points
    'h_factor': 0.02,  # h = 0.02/(N·J)
    'imag_tol': 1e-8,
    'rounding_factor': 1e4,  # Bruit d'arrondi toléré sur ln G, en unités de l'epsilon machine
    'unwrap_limit': 0.75  # Fraction de π tolérée entre deux échantillons
}

# Intégrales maîtresses
INTEGRAL_CONFIG = {
    'max_closed_form_m': 6,
    'quadrature_span': 60.0,  # θ_max = 60/a pour les cas régularisés
    'convergent_span': 2000  # θ_max = 2000π sans régulateur (n-2m < -1)
}

# Valeurs de coupure α ajustées sur les données de chaîne
CUTOFF_PRESETS = {
    'fig1_main': 3.51,  # N = 12, figure principale
    'inset_n4': 3.05,
    'inset_n8': 2.76,
    'inset_n12': 2.72
}

# Diagonalisation exacte
ED_CONFIG = {
    'max_sites': 14,
    'max_full_spectrum_sites': 12,
    'dense_dimension': 400,  # Diagonalisation dense en dessous
    'dense_expm_dimension': 128,  # Exponentielle dense en dessous
    'eigsh_vectors': 6,
    'initial_steps': 64,
    'steps_per_unit_time': 8,
    'max_doublings': 12,
    'state_tol': 1e-8,
    'merge_tol': 1e-10,
    'degeneracy_tol': 1e-9,
    'residual_tol': 1e-10
}

# Oracle dans l'espace de Fock tronqué
ORACLE_CONFIG = {
    'n_max': 32,
    'min_n_max': 8,
    'tail_tol': 1e-10,
    'trace_tol': 1e-6,
    'homotopy_points': 400,
    'branch_jump': 0.5
}

# Balayages en τ_Q
SWEEP_CONFIG = {
    'min_points': 6,
    'min_decades': 1.0,
    'log_model_preference': 0.5,  # Le modèle logarithmique doit réduire la RSS de moitié
    'workers': 1
}

# Sorties
OUTPUT_CONFIG = {
    'output_dir': 'output',
    'float_format': '%.17g',
    'line_terminator': '\n'
}

# Configuration du logging
LOGGING_CONFIG = {
    'log_file': 'output/workstats.log',
    'log_level': 'INFO',
    'log_format': '%(asctime)s - %(levelname)s - %(message)s'
}

# Codes de sortie de la ligne de commande
EXIT_CODES = {
    'success': 0,
    'interrupted': 1,
    'usage': 2,
    'tolerance': 3
}

# Messages personnalisés
MESSAGES = {
    'start': '='*80 + '\nDÉBUT DU CALCUL DES STATISTIQUES DE TRAVAIL\n' + '='*80,
    'end': '='*80 + '\n✅ CALCUL TERMINÉ AVEC SUCCÈS\n' + '='*80,
    'modes': '\n🌊 MODES DE LUTTINGER\n' + '-'*80,
    'cfw': '\n📈 FONCTION CARACTÉRISTIQUE DU TRAVAIL\n' + '-'*80,
    'cumulants': '\n🔬 CUMULANTS DU TRAVAIL\n' + '-'*80,
    'sweep': '\n📊 BALAYAGE EN DURÉE DE TREMPE\n' + '-'*80,
    'ed': '\n🧮 DIAGONALISATION EXACTE\n' + '-'*80,
    'oracle': '\n🔎 ORACLE DE FOCK\n' + '-'*80
}
