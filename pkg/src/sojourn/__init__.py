"""Sojourn areas of Fisher-Snedecor fields built from long-range dependent Gaussian components."""

from .covariance import (CovarianceModel, Kind, SVKind, bessel, c2, cauchy, evaluate, lrd_flag,
                         lrd_params, parse_model, powerlaw_sv, sqexp)
from .fieldsim import (EmbeddingNotPD, LatticeField, LatticeSpec, VectorFieldSpec, f_cdf, f_pdf,
                       fisher_snedecor_field, read_field, simulate_gaussian, simulate_vector,
                       write_field)
from .harness import (ExperimentConfig, case_config, ks_critical, ks_two_sample, normal_qq_data,
                      qq_data, run_experiment, standardize, variance_scaling_report,
                      write_experiment)
from .hermite import (c4, closed_form_cv_f_indicator, expansion_report, f_indicator,
                      hermite_coefficient, hermite_rank, parseval_check)
from .minkowski import (centered_sojourn, empirical_krk2, excursion_area, excursion_mask,
                        write_mask_pgm)
from .reduction import (UNIT_DISC, UNIT_SQUARE, c1, check_lemma2, check_lemma3,
                        dominant_components, theorem5_weights, var_krk_asymptote)

__version__ = "0.1.0"
