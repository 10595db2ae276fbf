"""Monte-Carlo toolkit for IRS-assisted multi-user uplink channel estimation.

Implements a training protocol that estimates the direct BS-user channels
and the per-element IRS-user channels through distributed reflecting
surfaces, using a DFT phase schedule and the rank-one structure of the
BS-IRS links, plus a conventional cascaded-channel protocol for
comparison. Ships LS and MMSE estimators, closed-form NMSE references,
and a seeded experiment harness with a CSV-producing CLI.
"""

from .analysis import (empirical_nmse, figure_of_merit, ls_mmse_gap,
                       nmse_closed, nmse_closed_correlated)
from .benchmark import (BenchmarkEstimateSet, BmObservationSet,
                        bm_estimate_all, bm_mmse_cascaded, bm_mmse_direct,
                        bm_recover_h2, bm_synthesize_and_decorrelate)
from .channel import (ChannelSet, CorrelationModel, build_correlation,
                      build_los_matrix, exp_correlation, matrix_sqrt,
                      sample_correlated_rayleigh, synthesize_channels)
from .config import (Geometry, PathLossSet, SystemConfig, build_geometry,
                     build_pathloss, config_from_dict, load_config,
                     min_subphases, pathloss_los, pathloss_nlos,
                     reference_config)
from .errors import (ConfigError, DimensionMismatch, EmptyInput,
                     InsufficientSubphases, InvalidCoefficient, InvalidSize,
                     IrsceError, NotHermitian, NotPSD, RankDeficient,
                     SingularFilter, UnsupportedKind, ZeroColumn,
                     ZeroDistance, ZeroNmse)
from .estimators import (EstimateSet, cascaded_estimate, estimate_all,
                         ls_estimates, mmse_direct, mmse_filter, mmse_irs)
from .harness import (CSV_HEADER, ExperimentSpec, ResultRow,
                      compare_protocols, preset_spec, run_experiment,
                      write_csv)
from .training import (ObservationSet, TrainingDesign, build_H1bar,
                       build_training_design, build_training_matrix,
                       decorrelate, effective_training_matrix,
                       noise_variances, synthesize_observations)

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "ChannelSet", "CorrelationModel", "EstimateSet", "ExperimentSpec",
    "Geometry", "ObservationSet", "PathLossSet", "ResultRow", "SystemConfig",
    "TrainingDesign", "BenchmarkEstimateSet", "BmObservationSet",
    "build_H1bar", "build_correlation", "build_geometry", "build_los_matrix",
    "build_pathloss", "build_training_design", "build_training_matrix",
    "bm_estimate_all", "bm_mmse_cascaded", "bm_mmse_direct", "bm_recover_h2",
    "bm_synthesize_and_decorrelate", "cascaded_estimate", "compare_protocols",
    "config_from_dict", "decorrelate", "effective_training_matrix",
    "empirical_nmse", "estimate_all",
    "exp_correlation", "figure_of_merit", "load_config", "ls_estimates",
    "ls_mmse_gap", "matrix_sqrt", "min_subphases", "mmse_direct",
    "mmse_filter", "mmse_irs", "nmse_closed", "nmse_closed_correlated",
    "noise_variances", "pathloss_los", "pathloss_nlos", "preset_spec",
    "reference_config", "run_experiment", "sample_correlated_rayleigh",
    "synthesize_channels", "synthesize_observations", "write_csv",
    "IrsceError", "ConfigError", "DimensionMismatch", "EmptyInput",
    "InsufficientSubphases", "InvalidCoefficient", "InvalidSize",
    "NotHermitian", "NotPSD", "RankDeficient", "SingularFilter",
    "UnsupportedKind", "ZeroColumn", "ZeroDistance", "ZeroNmse",
    "__version__",
]
