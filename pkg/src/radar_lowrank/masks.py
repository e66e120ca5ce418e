"""Sampling sets for sparse scanning.

Two schemes are supported:

``uniform_entries``
    Every range-azimuth cell is equally likely; exactly ``round(p m n)``
    distinct cells are kept.
``azimuth_miss``
    A fast scan that fully dwells on a random subset of azimuth rays
    (``dwell_ratio`` of the columns) and picks up stray samples elsewhere,
    topped up uniformly so the total is again ``round(p m n)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .completion import ObservationSet
from .errors import InfeasibleFraction, OutOfBounds, ValidationError
from .matrix import as_array

SCHEMES = ("uniform_entries", "azimuth_miss")


def _round_half_up(x):
    return int(np.floor(x + 0.5))


@dataclass(frozen=True)
class MaskSpec:
    shape: tuple
    fraction: float = 1.0 / 3.0
    scheme: str = "uniform_entries"
    seed: int = 0
    # azimuth_miss only; defaults to fraction / 2
    dwell_ratio: float | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        m, n = self.shape
        if m < 1 or n < 1:
            raise ValidationError(f"invalid shape {self.shape}")
        if not 0.0 < self.fraction <= 1.0:
            raise ValidationError("fraction must lie in (0, 1]")
        if self.fraction * m * n < 1:
            raise ValidationError("fraction too small to sample a single entry")
        if self.scheme == "azimuth_miss":
            if self.dwell_ratio is None:
                object.__setattr__(self, "dwell_ratio", self.fraction / 2.0)
            if not 0.0 < self.dwell_ratio <= 1.0:
                raise ValidationError("dwell_ratio must lie in (0, 1]")

    @property
    def target_count(self):
        m, n = self.shape
        return _round_half_up(self.fraction * m * n)


def make_mask(spec):
    """Sampled positions as an ``(k, 2)`` array of ``(row, col)``, row-major order."""
    m, n = spec.shape
    total = spec.target_count
    rng = np.random.default_rng(spec.seed)
    if spec.scheme == "uniform_entries":
        linear = rng.permutation(m * n)[:total]
    else:
        n_full = _round_half_up(spec.dwell_ratio * n)
        if n_full * m > total:
            raise InfeasibleFraction(
                f"dwelling on {n_full} of {n} rays already keeps {n_full * m} "
                f"entries, more than the {total} allowed by fraction {spec.fraction}"
            )
        full_cols = np.sort(rng.permutation(n)[:n_full])
        keep = np.zeros((m, n), dtype=bool)
        keep[:, full_cols] = True
        rest = np.flatnonzero(~keep.ravel())
        stray = rest[rng.permutation(rest.size)[: total - n_full * m]]
        keep.ravel()[stray] = True
        linear = np.flatnonzero(keep.ravel())
    linear = np.sort(linear)
    return np.column_stack([linear // n, linear % n])


def apply_mask(field, omega):
    """Observation set holding ``field`` values at the ``(row, col)`` pairs in ``omega``."""
    a = as_array(field)
    idx = np.asarray(omega, dtype=np.int64).reshape(-1, 2)
    m, n = a.shape
    if idx.size and (idx.min() < 0 or idx[:, 0].max() >= m or idx[:, 1].max() >= n):
        raise OutOfBounds(f"mask index outside a {m}x{n} field")
    return ObservationSet((m, n), idx[:, 0], idx[:, 1], a[idx[:, 0], idx[:, 1]])
