"""Flatness diagnostics for trigonometric polynomials and generalized Riesz products."""

from .errors import FlatPolyError
from .poly import (Grid, ModulusSpectrum, TrigPoly, default_grid, fourier_coeff,
                   l1_modulus, l2_norm, normalize_l2, squared_modulus, sup_modulus)
from .generators import (ClassBSpec, VdcFunctionSpec, blaschke_partial_sum, class_b,
                         gauss_fresnel, gauss_fresnel_bound, hardy_littlewood,
                         hl_dyadic_certificate, single_spike, vdc_certificate)
from .factorization import (InnerOuterFactorization, find_roots, inner_outer,
                            log_integral, outer_constant_track)
from .flatness import (FlatnessReport, GramMatrix, egorov_select, flatness_report,
                       gram_matrix, gram_sum_r, ratio_diagnostics)
from .riesz import (RieszProductState, ScaledFamily, SingularityDiagnostic,
                    choose_scales, is_dissociated, l1_of_sqrt_density, partial_product,
                    peyriere_series, singularity_diagnostic, stabilized_coeffs)

__version__ = "0.1.0"
