"""Nuclear-norm matrix completion by singular value thresholding (SVT).

The iteration is the Uzawa scheme of Cai, Candes and Shen::

    Y0 = 0
    X_k = shrink(Y_{k-1}, tau)
    Y_k = Y_{k-1} + delta * P_omega(M - X_k)

stopped once ``|P_omega(X_k - M)|_F / |P_omega(M)|_F <= tolerance``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Divergence, OutOfBounds, ShapeMismatch, ValidationError
from .matrix import DenseMatrix, as_array, jacobi_svd

log = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Observed entries ``M_ij`` for ``(i, j)`` in the sampling set.

    Entries are stored as parallel ``rows``, ``cols`` and ``values`` arrays,
    sorted by row-major linear index.
    """

    shape: tuple
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        m, n = (int(s) for s in self.shape)
        if m < 1 or n < 1:
            raise ValidationError(f"invalid shape {self.shape}")
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if not (rows.size == cols.size == values.size):
            raise ValidationError("rows, cols and values must have equal length")
        if rows.size == 0:
            raise ValidationError("observation set is empty (sampling fraction must be > 0)")
        if rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n:
            raise OutOfBounds(f"observation index outside a {m}x{n} matrix")
        if not np.all(np.isfinite(values)):
            raise ValidationError("observed values must be finite")
        linear = rows * n + cols
        order = np.argsort(linear, kind="stable")
        linear = linear[order]
        if np.any(linear[1:] == linear[:-1]):
            raise ValidationError("duplicate (i, j) pairs in observation set")
        for name, arr in (("rows", rows[order]), ("cols", cols[order]), ("values", values[order])):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "shape", (m, n))

    def __len__(self):
        return int(self.rows.size)

    @property
    def sampling_fraction(self):
        m, n = self.shape
        return len(self) / (m * n)

    @property
    def linear_index(self):
        return self.rows * self.shape[1] + self.cols

    def entries(self):
        """Iterate over ``(i, j, value)`` triples."""
        for i, j, v in zip(self.rows.tolist(), self.cols.tolist(), self.values.tolist()):
            yield i, j, v

    def mask(self):
        out = np.zeros(self.shape, dtype=bool)
        out[self.rows, self.cols] = True
        return out

    def dense(self, fill=0.0):
        """Observed values in place, ``fill`` elsewhere."""
        out = np.full(self.shape, fill, dtype=np.float64)
        out[self.rows, self.cols] = self.values
        return out


@dataclass(frozen=True)
class SvtConfig:
    tau: float
    delta: float
    max_iters: int = 500
    tolerance: float = 1e-4
    # caps the rank of each shrink output; None means unbounded
    inner_rank_cap: int | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ValidationError(f"tau must be positive, got {self.tau}")
        if not self.delta > 0:
            raise ValidationError(f"delta must be positive, got {self.delta}")
        if int(self.max_iters) < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if not 0 < self.tolerance < 1:
            raise ValidationError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if self.inner_rank_cap is not None and int(self.inner_rank_cap) < 1:
            raise ValidationError("inner_rank_cap must be a positive integer or None")


@dataclass(frozen=True, eq=False)
class SvtResult:
    X_hat: DenseMatrix
    iterations_used: int
    final_residual: float
    converged: bool
    rank_of_solution: int
    residual_history: list = field(default_factory=list, repr=False)


def default_svt_config(omega):
    """Standard SVT heuristics: ``tau = 5 sqrt(mn)``, ``delta = 1.2 / p``."""
    m, n = omega.shape
    return SvtConfig(
        tau=5.0 * math.sqrt(m * n),
        delta=1.2 / omega.sampling_fraction,
        max_iters=500,
        tolerance=1e-4,
        inner_rank_cap=None,
    )


def project_onto_omega(A, omega):
    """Values of ``A`` at the positions of ``omega``, as a new observation set."""
    a = as_array(A)
    if a.shape != omega.shape:
        raise ShapeMismatch(f"matrix {a.shape} vs observation set {omega.shape}")
    return ObservationSet(omega.shape, omega.rows, omega.cols, a[omega.rows, omega.cols])


def _shrink(y, tau, basis=None, rank_cap=None):
    # returns (X, rank, warm-start basis for the next call)
    U, sigma, V = jacobi_svd(y, basis)
    shrunk = sigma - tau
    r = int(np.count_nonzero(shrunk > 0.0))
    if rank_cap is not None:
        r = min(r, int(rank_cap))
    x = (U[:, :r] * shrunk[:r]) @ V[:, :r].T
    return x, r, (V if y.shape[0] >= y.shape[1] else U)


def shrink(A, tau):
    """Singular value soft-thresholding ``U diag(max(sigma - tau, 0)) V^T``.

    This is the proximal operator of ``tau * ||X||_*``.
    """
    if not tau > 0:
        raise ValidationError(f"tau must be positive, got {tau}")
    x, _, _ = _shrink(as_array(A), float(tau))
    return DenseMatrix(x)


def svt_complete(omega, cfg=None):
    """Recover a low-rank matrix from the entries in ``omega``.

    Parameters
    ----------
    omega : ObservationSet
        Sampled entries of the unknown matrix.
    cfg : SvtConfig, optional
        Iteration parameters; :func:`default_svt_config` when omitted.

    Returns
    -------
    SvtResult
        The last iterate, with its residual on ``omega`` and a convergence
        flag.  ``residual_history`` holds the relative residual per iteration.

    Raises
    ------
    Divergence
        If the residual grows beyond ``1e6`` times its first value.
    """
    if cfg is None:
        cfg = default_svt_config(omega)
    m, n = omega.shape
    idx = omega.linear_index
    observed = omega.values
    obs_norm = float(np.linalg.norm(observed))
    if obs_norm == 0.0:
        # P_omega(M) = 0: the zero matrix is feasible and has minimal norm
        return SvtResult(DenseMatrix(np.zeros((m, n))), 1, 0.0, True, 0, [0.0])

    Y = np.zeros((m, n))
    y_flat = Y.reshape(-1)
    basis = None
    history = []
    first = None
    converged = False
    rank = 0
    X = Y
    for k in range(1, int(cfg.max_iters) + 1):
        X, rank, basis = _shrink(Y, cfg.tau, basis, cfg.inner_rank_cap)
        resid = observed - X.reshape(-1)[idx]
        res = float(np.linalg.norm(resid)) / obs_norm
        history.append(res)
        if first is None:
            first = res
        if not math.isfinite(res) or res > DIVERGENCE_FACTOR * first:
            raise Divergence(
                f"SVT residual {res:.3g} at iteration {k} exceeds "
                f"{DIVERGENCE_FACTOR:g}x the initial {first:.3g}; reduce delta",
                history,
            )
        if k % 50 == 0:
            log.debug("svt iter %d rank %d residual %.3e", k, rank, res)
        if res <= cfg.tolerance:
            converged = True
            break
        y_flat[idx] += cfg.delta * resid
    return SvtResult(
        X_hat=DenseMatrix(X),
        iterations_used=len(history),
        final_residual=history[-1],
        converged=converged,
        rank_of_solution=rank,
        residual_history=history,
    )
