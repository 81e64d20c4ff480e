"""Rigorous beta-expansions, Sturmian points and uniform recurrence exponents."""

from .beta_core import (
    Admissibility, DigitWord, ExpansionOfOne, ParryStatus, digits, expansion_of_one, is_admissible,
    orbit_point, random_admissible_word, real_from_digits, star_digits,
)
from .errors import (
    AdmissibilityFailed, BetaRecurError, ConfigError, DepthTooLarge, DivisionByZero, InsufficientDepth,
    NotAdmissible, PeriodicInput, PrecisionExhausted, Undecidable,
)
from .exactreal import (
    DEFAULT_POLICY, EQUAL, GREATER, LESS, Ball, PrecisionPolicy, Quadratic, Rational, Real, arith, compare,
    floor_scaled, golden_ratio, parse_real,
)
from .recurrence import (
    ExponentReport, MatchTable, detect_periodic, exponent_report, match_sequences, orbit_distance,
    r_estimate, rhat_estimate, v_estimate, verify_lemma_cases, w1_estimate,
)
from .words import (
    PeriodTable, SturmianSpec, apply_morphism_fk, fibonacci_identities, ice_estimate, period_prefix_table,
    psi_omega_quotients, sigma_phi, sturmian_word,
)

__version__ = "0.1.0"

__all__ = [
    "Admissibility",
    "DigitWord",
    "ExpansionOfOne",
    "ParryStatus",
    "digits",
    "expansion_of_one",
    "is_admissible",
    "orbit_point",
    "random_admissible_word",
    "real_from_digits",
    "star_digits",
    "AdmissibilityFailed",
    "BetaRecurError",
    "ConfigError",
    "DepthTooLarge",
    "DivisionByZero",
    "InsufficientDepth",
    "NotAdmissible",
    "PeriodicInput",
    "PrecisionExhausted",
    "Undecidable",
    "DEFAULT_POLICY",
    "EQUAL",
    "GREATER",
    "LESS",
    "Ball",
    "PrecisionPolicy",
    "Quadratic",
    "Rational",
    "Real",
    "arith",
    "compare",
    "floor_scaled",
    "golden_ratio",
    "parse_real",
    "ExponentReport",
    "MatchTable",
    "detect_periodic",
    "exponent_report",
    "match_sequences",
    "orbit_distance",
    "r_estimate",
    "rhat_estimate",
    "v_estimate",
    "verify_lemma_cases",
    "w1_estimate",
    "PeriodTable",
    "SturmianSpec",
    "apply_morphism_fk",
    "fibonacci_identities",
    "ice_estimate",
    "period_prefix_table",
    "psi_omega_quotients",
    "sigma_phi",
    "sturmian_word",
]
