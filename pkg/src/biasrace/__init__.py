"""Chebyshev-bias prime races: densities from zeros of Dirichlet L-functions,
moment formulas, bias criteria for weighted races and sieve checks."""
from .arith import Modulus, as_modulus, half_primorial, lambda_density_exponent, ratio_rho_logradical, rho
from .characters import DirichletCharacter, RealCharacter, dirichlet_group, enumerate_real_characters, kronecker
from .dist import (
    DensityResult,
    RaceModel,
    berry_esseen_gap,
    bias_ratio,
    build_model_nr_r,
    chebyshev_lower_bound,
    density_fourier,
    density_gaussian,
    density_montecarlo,
    montgomery_odlyzko_bounds,
    variance_closed_form,
)
from .empirical import RaceTrace, explicit_formula_check, log_density_estimate, sieve_race, skewes_search
from .general import (
    RaceSpec,
    build_general_model,
    check_bias_criterion,
    check_constant_coefficient_race,
    check_limitation,
    exact_variance,
    nr_r_spec,
)
from .lfunc import AccuracyError, LFunction
from .zeros import ZeroSet, cached_zeros, find_zeros, load_zeros, save_zeros

__version__ = "0.1.0"
