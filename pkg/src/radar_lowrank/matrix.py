"""Dense real matrices, one-sided Jacobi SVD and low-rank approximation.

The SVD is a cyclic one-sided (Hestenes) Jacobi iteration.  Tall inputs are
first reduced with a Householder QR so the rotations act on an ``n x n``
triangle instead of the full ``m x n`` block.  The rotation loop is compiled
with numba and runs single-threaded, so results are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import EmptyMatrix, NonFinite, ZeroRank

#: singular values below ``RANK_CUTOFF * sigma_1`` are treated as zero
RANK_CUTOFF = 1e-12
#: a column pair is rotated while ``|a_p . a_q| > JACOBI_TOL * |a_p| |a_q|``
JACOBI_TOL = 1e-14
MAX_SWEEPS = 60


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Immutable row-major real matrix.

    Construct it from anything :func:`numpy.asarray` understands.  The
    stored array is a read-only float64 copy; ``data`` is its flat row-major
    view.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got {arr.ndim} dimensions")
        if arr.shape[0] == 0 or arr.shape[1] == 0:
            raise EmptyMatrix(f"matrix has shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFinite("matrix contains NaN or Inf entries")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_flat(cls, rows, cols, data):
        data = np.asarray(data, dtype=np.float64)
        if data.size != rows * cols:
            raise ValueError(f"{data.size} values cannot fill a {rows}x{cols} matrix")
        return cls(data.reshape(rows, cols))

    @property
    def rows(self):
        return self.values.shape[0]

    @property
    def cols(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @property
    def data(self):
        return self.values.ravel()

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.values, other.values))

    __hash__ = None

    def __repr__(self):
        return f"DenseMatrix({self.rows}x{self.cols})"


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Thin SVD ``A = U diag(singular_values) V^T`` of numerical rank ``rank``.

    ``U`` is ``m x r`` and ``V`` is ``n x r``, both with orthonormal columns.
    A zero matrix yields ``rank == 0`` with empty factors.
    """

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return int(self.singular_values.size)

    @property
    def shape(self):
        return self.U.shape[0], self.V.shape[0]

    def reconstruct(self, keep=None):
        """Dense ``U diag(s) V^T`` using the leading ``keep`` triplets."""
        k = self.rank if keep is None else min(keep, self.rank)
        out = (self.U[:, :k] * self.singular_values[:k]) @ self.V[:, :k].T
        return DenseMatrix(out)


def as_array(A):
    """Validated float64 2-D array view of a matrix-like input."""
    if isinstance(A, DenseMatrix):
        return A.values
    return DenseMatrix(A).values


@numba.njit(cache=True)
def _jacobi_sweeps(B, V, tol, max_sweeps):
    # B (m x n) and V (n x n) are Fortran-ordered and rotated in place.
    m, n = B.shape
    nv = V.shape[0]
    norms = np.empty(n)
    for j in range(n):
        acc = 0.0
        for i in range(m):
            acc += B[i, j] * B[i, j]
        norms[j] = acc
    for sweep in range(max_sweeps):
        rotated = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = norms[p]
                beta = norms[q]
                if alpha == 0.0 or beta == 0.0:
                    continue
                gamma = 0.0
                for i in range(m):
                    gamma += B[i, p] * B[i, q]
                if abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated += 1
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + np.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                na = 0.0
                nb = 0.0
                for i in range(m):
                    x = B[i, p]
                    y = B[i, q]
                    xp = c * x - s * y
                    yq = s * x + c * y
                    B[i, p] = xp
                    B[i, q] = yq
                    na += xp * xp
                    nb += yq * yq
                norms[p] = na
                norms[q] = nb
                for i in range(nv):
                    x = V[i, p]
                    y = V[i, q]
                    V[i, p] = c * x - s * y
                    V[i, q] = s * x + c * y
        if rotated == 0:
            return sweep + 1
    return -1


def _tall_jacobi(a, basis):
    m, n = a.shape
    if m > n:
        q, r = np.linalg.qr(a)
    else:
        q, r = None, a
    if basis is None:
        B = np.array(r, dtype=np.float64, order="F")
        V = np.asfortranarray(np.eye(n))
    else:
        B = np.asfortranarray(r @ basis)
        V = np.array(basis, dtype=np.float64, order="F")
    _jacobi_sweeps(B, V, JACOBI_TOL, MAX_SWEEPS)
    sigma = np.sqrt(np.einsum("ij,ij->j", B, B))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    B = B[:, order]
    V = np.ascontiguousarray(V[:, order])
    safe = np.where(sigma > 0.0, sigma, 1.0)
    U = B / safe
    U[:, sigma == 0.0] = 0.0
    if q is not None:
        U = q @ U
    return U, sigma, V


def jacobi_svd(a, basis=None):
    """Full thin SVD of a 2-D array, returning ``(U, sigma, V)``.

    All ``min(m, n)`` singular values are returned, including the numerically
    zero tail.  ``basis`` is an optional orthogonal warm start for the right
    factor of the tall orientation (``V`` when ``m >= n``, ``U`` otherwise);
    a good guess cuts the number of sweeps sharply.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape[0] >= a.shape[1]:
        return _tall_jacobi(a, basis)
    V, sigma, U = _tall_jacobi(a.T, basis)
    return U, sigma, V


def svd(A):
    """Thin SVD with singular values below ``1e-12 * sigma_1`` dropped."""
    a = as_array(A)
    U, sigma, V = jacobi_svd(a)
    if sigma[0] == 0.0:
        return SvdFactors(U[:, :0], sigma[:0], V[:, :0])
    r = int(np.count_nonzero(sigma >= RANK_CUTOFF * sigma[0]))
    return SvdFactors(U[:, :r], sigma[:r], V[:, :r])


def low_rank_approx(F, r_prime):
    """Best rank-``r_prime`` approximation from precomputed factors.

    Keeps the leading ``r_prime`` singular triplets; asking for more than the
    rank returns the full reconstruction.
    """
    if r_prime < 1:
        raise ZeroRank(f"r_prime must be >= 1, got {r_prime}")
    m, n = F.shape
    if F.rank == 0:
        return DenseMatrix(np.zeros((m, n)))
    return F.reconstruct(int(r_prime))


def frobenius_norm(A):
    a = as_array(A)
    return float(np.sqrt(np.sum(a * a)))


def nuclear_norm(A):
    return float(np.sum(svd(A).singular_values))


def singular_value_profile(A):
    """All ``min(m, n)`` singular values in descending order, tail included."""
    _, sigma, _ = jacobi_svd(as_array(A))
    return sigma
