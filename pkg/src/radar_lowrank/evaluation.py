"""Error metrics and histograms for the reconstruction pipeline.

``epsilon1`` compares the reconstruction with the low-rank matrix that was
actually sampled; ``epsilon2`` compares it with the original full-rank field::

    epsilon1 = |Z_hat - Z_lowrank|_F / |Z_lowrank|_F
    epsilon2 = |Z_hat - Z|_F / |Z|_F
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ShapeMismatch
from .matrix import as_array, low_rank_approx, svd

SAME_ORDER_BAND = (0.1, 10.0)


@dataclass(frozen=True)
class ErrorReport:
    epsilon1: float
    epsilon2: float
    same_order: bool

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    def to_dict(self):
        return {"bin_edges": self.bin_edges.tolist(), "counts": self.counts.tolist()}


def _relative_error(x, ref):
    denom = float(np.linalg.norm(ref))
    diff = float(np.linalg.norm(x - ref))
    if denom == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / denom


def same_order(e1, e2):
    if e1 == 0.0 and e2 == 0.0:
        return True
    if e1 == 0.0 or e2 == 0.0:
        return False
    lo, hi = SAME_ORDER_BAND
    return lo <= e1 / e2 <= hi


def error_report(original, lowrank, reconstructed):
    z = as_array(original)
    zt = as_array(lowrank)
    zh = as_array(reconstructed)
    if not (z.shape == zt.shape == zh.shape):
        raise ShapeMismatch(f"shapes differ: {z.shape}, {zt.shape}, {zh.shape}")
    e1 = _relative_error(zh, zt)
    e2 = _relative_error(zh, z)
    return ErrorReport(e1, e2, same_order(e1, e2))


def shared_bin_edges(arrays, bin_width=1.0):
    """Uniform edges of width ``bin_width`` covering every value in ``arrays``."""
    lo = min(float(np.min(a)) for a in arrays)
    hi = max(float(np.max(a)) for a in arrays)
    start = math.floor(lo / bin_width) * bin_width
    n_bins = max(1, math.ceil((hi - start) / bin_width))
    if start + n_bins * bin_width < hi:
        n_bins += 1
    return start + bin_width * np.arange(n_bins + 1)


def histograms(named, bin_width=1.0):
    """Histograms of several fields over shared 1-dBZ (by default) bins."""
    arrays = {k: as_array(v) for k, v in named.items()}
    edges = shared_bin_edges(list(arrays.values()), bin_width)
    out = {}
    for name, a in arrays.items():
        counts, _ = np.histogram(a, bins=edges)
        out[name] = Histogram(edges, counts.astype(np.int64))
    return out


def retained_rank(rank, fraction):
    """Number of singular values kept when retaining ``fraction`` of ``rank``."""
    return max(1, int(math.floor(fraction * rank + 0.5)))


def truncate_fraction(A, fraction=0.25):
    """Low-rank approximation keeping ``fraction`` of the numerical rank.

    Returns ``(approximation, factors, kept)``.
    """
    factors = svd(A)
    kept = retained_rank(factors.rank, fraction)
    return low_rank_approx(factors, kept), factors, kept
