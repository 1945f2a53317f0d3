"""gammanoise: a spectral laboratory for colored Gaussian noise on the torus.

Builds truncated Gaussian series against orthonormal systems, measures their
negative-smoothness norms three ways (Monte Carlo, square function, exact
Hilbert-Schmidt), studies the convolution-type operators behind multiplier
bounds, integrates the additive stochastic heat equation, and sweeps the
parameter boundaries where the sharp convergence conditions flip.
"""

from .conditions import ParamTuple, predicted_exponent, sharp_condition
from .grid import (Grid, SpectralField, constant_field, field_from_function,
                   forward_transform, inverse_transform, mode_field, product,
                   zero_field)
from .norms import (bessel_apply, bessel_kernel, hsq_norm, lp_block, lq_norm,
                    weak_lp_norm)
from .operators import (ConvPair, afg_bruteforce_hs, afg_gamma_norm,
                        endpoint_checks, gamma_young_check,
                        mg_sobolev_gamma_norm, schatten_heat_norm)
from .series import (MCEstimate, SeriesSpec, classify_growth, hs_gamma_norm_exact,
                     mc_gamma_norm, sample_series, sq_function_gamma_norm)
from .spde import (DiagonalNoise, SpdeConfig, SystemNoise, Trajectory,
                   scaling_diagnostic, second_moment_closed_form, simulate,
                   spacetime_norm)
from .systems import (Coloring, FourierSystem, HaarSystem, ShiftedBumpSystem,
                      SyntheticGrowthSystem, ell_zeta_weighted_norm,
                      haar_lattice_sums)

__version__ = "0.1.0"

__all__ = [
    "Grid", "SpectralField", "forward_transform", "inverse_transform",
    "constant_field", "mode_field", "zero_field", "field_from_function", "product",
    "lq_norm", "weak_lp_norm", "bessel_apply", "hsq_norm", "lp_block", "bessel_kernel",
    "Coloring", "FourierSystem", "HaarSystem", "ShiftedBumpSystem",
    "SyntheticGrowthSystem", "ell_zeta_weighted_norm", "haar_lattice_sums",
    "ParamTuple", "sharp_condition", "predicted_exponent",
    "SeriesSpec", "MCEstimate", "sample_series", "mc_gamma_norm",
    "sq_function_gamma_norm", "hs_gamma_norm_exact", "classify_growth",
    "ConvPair", "afg_gamma_norm", "afg_bruteforce_hs", "gamma_young_check",
    "mg_sobolev_gamma_norm", "schatten_heat_norm", "endpoint_checks",
    "DiagonalNoise", "SystemNoise", "SpdeConfig", "Trajectory", "simulate",
    "second_moment_closed_form", "spacetime_norm", "scaling_diagnostic",
]
