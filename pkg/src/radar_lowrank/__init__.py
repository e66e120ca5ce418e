"""Sparse sampling of weather radar fields recovered by low-rank matrix completion."""

from .completion import (
    ObservationSet,
    SvtConfig,
    SvtResult,
    default_svt_config,
    project_onto_omega,
    shrink,
    svt_complete,
)
from .evaluation import ErrorReport, Histogram, error_report, histograms, truncate_fraction
from .field import FieldSpec, coverage_fraction_of, synthesize_field
from .masks import MaskSpec, apply_mask, make_mask
from .matrix import (
    DenseMatrix,
    SvdFactors,
    frobenius_norm,
    low_rank_approx,
    nuclear_norm,
    singular_value_profile,
    svd,
)
from .radar import (
    IqSeries,
    RadarParams,
    ScattererScene,
    SpectrumMoments,
    doppler_frequency,
    estimate_moments,
    gaussian_psd,
    num_range_bins,
    periodogram,
    range_bin_length,
    reflectivity_dbz,
    synthesize_point_target_iq,
    synthesize_weather_iq,
)

__version__ = "0.1.0"
