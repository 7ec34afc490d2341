"""Numerical tools for Siegel disks of quadratic maps and Herman rings of circle families."""

__version__ = "0.1.0"

from .arithmetic import (GOLDEN, SILVER, BrjunoValue, Classification, ClassifyConfig,  # noqa: E402
                         ContinuedFractionExpansion, RationalDetected, RotationNumber,
                         brjuno_function, brjuno_sum, classify, continued_fraction, parse_alpha)
from .herman import (CircleFamily, ConjugacySamples, LambdaSolution, NearRationalError,  # noqa: E402
                     RotationEstimate, conjugacy_samples, lift_eval, lock_scan, modulus_estimate,
                     rotation_number, solve_lambda)
from .kernels import BACKEND  # noqa: E402
from .linearizer import (LinearizerSeries, RadiusEstimate, Resonance, ResonanceError,  # noqa: E402
                         conformal_radius, evaluate_linearizer, export_series, linearizer_coeffs,
                         quadratic_map, recursion_residual, verify_conjugacy)
from .search import (IVTSearchError, ProbeRow, RadiusOracle, SearchConfig, SearchError,  # noqa: E402
                     SearchTrace, Stage, ivt_search, linearizer_distance, semicontinuity_probe,
                     simplest_rational, target_radius_search)

__all__ = [
    "__version__",
    "GOLDEN",
    "SILVER",
    "BrjunoValue",
    "Classification",
    "ClassifyConfig",
    "ContinuedFractionExpansion",
    "RationalDetected",
    "RotationNumber",
    "brjuno_function",
    "brjuno_sum",
    "classify",
    "continued_fraction",
    "parse_alpha",
    "CircleFamily",
    "ConjugacySamples",
    "LambdaSolution",
    "NearRationalError",
    "RotationEstimate",
    "conjugacy_samples",
    "lift_eval",
    "lock_scan",
    "modulus_estimate",
    "rotation_number",
    "solve_lambda",
    "BACKEND",
    "LinearizerSeries",
    "RadiusEstimate",
    "Resonance",
    "ResonanceError",
    "conformal_radius",
    "evaluate_linearizer",
    "export_series",
    "linearizer_coeffs",
    "quadratic_map",
    "recursion_residual",
    "verify_conjugacy",
    "IVTSearchError",
    "ProbeRow",
    "RadiusOracle",
    "SearchConfig",
    "SearchError",
    "SearchTrace",
    "Stage",
    "ivt_search",
    "linearizer_distance",
    "semicontinuity_probe",
    "simplest_rational",
    "target_radius_search",
]
