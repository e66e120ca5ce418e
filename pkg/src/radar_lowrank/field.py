"""Synthetic range x azimuth reflectivity fields.

Stand-ins for real radar scans: white noise smoothed by separable Gaussian
kernels, so the spatial correlation (and with it the rank decay) is set by two
correlation lengths.  All outputs are synthetic.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .errors import ValidationError
from .matrix import DenseMatrix, as_array

DRY_FLOOR_DBZ = 0.0
PAPER_SHAPE = (1930, 413)


@dataclass(frozen=True)
class FieldSpec:
    """Parameters of a synthetic field.

    Correlation lengths are the standard deviations of the Gaussian smoothing
    kernels, in cells.  ``mean_dbz`` and ``std_dbz`` describe the wet cells;
    dry cells are set to ``floor_dbz``.
    """

    n_range: int = 200
    n_azimuth: int = 100
    correlation_length_range: float = 20.0
    correlation_length_azimuth: float = 10.0
    mean_dbz: float = 30.0
    std_dbz: float = 8.0
    coverage_fraction: float = 1.0
    seed: int = 0
    floor_dbz: float = DRY_FLOOR_DBZ

    def __post_init__(self):
        if self.n_range < 2 or self.n_azimuth < 2:
            raise ValidationError("field dimensions must be >= 2")
        if self.correlation_length_range < 0 or self.correlation_length_azimuth < 0:
            raise ValidationError("correlation lengths must be >= 0")
        if not 0.0 <= self.coverage_fraction <= 1.0:
            raise ValidationError("coverage_fraction must lie in [0, 1]")
        if self.std_dbz < 0:
            raise ValidationError("std_dbz must be >= 0")

    @classmethod
    def paper_scale(cls, **overrides):
        """1930 gates x 413 rays, correlation scaled from the 200 x 100 default."""
        kw = dict(
            n_range=PAPER_SHAPE[0],
            n_azimuth=PAPER_SHAPE[1],
            correlation_length_range=193.0,
            correlation_length_azimuth=41.0,
        )
        kw.update(overrides)
        return cls(**kw)

    def to_dict(self):
        d = asdict(self)
        d["synthetic"] = True
        return d


def _smooth(noise, length, axis):
    if length <= 0:
        return noise
    return gaussian_filter1d(noise, float(length), axis=axis, mode="reflect")


def synthesize_field(spec):
    """Seeded correlated reflectivity field in dBZ.

    The smoothed noise is ranked and the top ``coverage_fraction`` of cells
    become wet; their values are standardized and mapped to
    ``mean_dbz``/``std_dbz``.  Everything else is set to the dry floor.
    """
    rng = np.random.default_rng(spec.seed)
    m, n = spec.n_range, spec.n_azimuth
    z = rng.standard_normal((m, n))
    z = _smooth(z, spec.correlation_length_range, 0)
    z = _smooth(z, spec.correlation_length_azimuth, 1)

    n_wet = int(np.floor(spec.coverage_fraction * m * n + 0.5))
    out = np.full(m * n, float(spec.floor_dbz))
    if n_wet > 0:
        flat = z.ravel()
        wet = np.argsort(-flat, kind="stable")[:n_wet]
        vals = flat[wet]
        sd = vals.std()
        scaled = (vals - vals.mean()) / sd if sd > 0 else np.zeros_like(vals)
        out[wet] = spec.mean_dbz + spec.std_dbz * scaled
    return DenseMatrix(out.reshape(m, n))


def coverage_fraction_of(field, wet_threshold=DRY_FLOOR_DBZ):
    """Fraction of cells strictly above ``wet_threshold``."""
    a = as_array(field)
    return float(np.count_nonzero(a > wet_threshold)) / a.size
