"""Leading eigenpairs of the weighted-centered low-rank similarity problem.

Given the rank-R factor G (G @ G.T approximates the kernel matrix) the target
problem is

    D^-1 M (G G^T) beta = lambda beta,

where D = diag(G (G^T 1)) holds the approximated degrees and M removes the
(1/d_i)-weighted mean from each column.  Two routes are provided:

* `leading_eigenpairs_proposed` -- the production path.  It symmetrizes the
  problem with the substitution alpha = D^(1/2) beta, forms
  X = D^(-1/2) M G (one pass, optionally in place of G), takes a thin QR of X
  and an SVD of the small R x R triangle.  Eigenvalues are the squared
  singular values, eigenvectors are Q @ U scaled back by D^(-1/2).
* `leading_eigenpairs_original` -- reference path retained as a test oracle.
  It takes the SVD of G itself and solves the nonsymmetric R x R problem
  U^T D^-1 M U Lambda^2.  Guarded to small instances; both routes agree to
  rounding.

Neither route ever forms an N x N matrix; beyond X the proposed path
allocates one N x R orthogonal factor plus R x R workspaces.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegreeError, FactorizationError

_DEGREE_FLOOR = 1e-12
_ORACLE_MAX_N = 5000


@dataclass
class EigenBundle:
    """Leading eigenvectors (columns of `betas`), eigenvalues sorted
    descending, the approximated degrees they were computed under, and the
    number of pairs requested."""

    betas: np.ndarray
    lambdas: np.ndarray
    degrees: np.ndarray
    k_requested: int


def approx_degrees(factor):
    """Row sums of the approximated kernel matrix, computed as G (G^T 1).

    Costs O(N R); never forms G G^T.  Fails if any degree is at or below the
    floor, since the inverse square-root weighting is then undefined.
    """
    factor = np.asarray(factor)
    if factor.size == 0:
        raise ValueError("empty factor")
    degrees = factor @ (factor.T @ np.ones(factor.shape[0]))
    if np.any(degrees <= _DEGREE_FLOOR):
        bad = int(np.argmin(degrees))
        raise DegreeError(
            f"disconnected/near-zero degree at row {bad} ({degrees[bad]:.3e}); "
            "inverse-degree weighting undefined"
        )
    return degrees


def center_scale(factor, degrees, overwrite=False):
    """Remove the (1/d)-weighted column means and scale rows by d^(-1/2).

    Column c of the result is d^(-1/2) * (g_c - mu_c) with
    mu_c = (sum_i g_ic / d_i) / (sum_i 1 / d_i).  With `overwrite=True` the
    input storage is reused.
    """
    factor = np.asarray(factor, dtype=np.float64)
    degrees = np.asarray(degrees, dtype=np.float64)
    if np.any(degrees <= 0):
        raise DegreeError("degrees must be strictly positive")
    inv_d = 1.0 / degrees
    mu = (inv_d @ factor) / inv_d.sum()
    x = factor if overwrite else factor.copy()
    x -= mu
    x *= np.sqrt(inv_d)[:, None]
    return x


def _fix_signs(betas):
    # Deterministic orientation: the largest-magnitude entry of each column is
    # made positive (argmax takes the lowest index on ties).
    for j in range(betas.shape[1]):
        col = betas[:, j]
        i = int(np.argmax(np.abs(col)))
        if col[i] < 0:
            col *= -1.0
    return betas


def leading_eigenpairs_proposed(x, degrees, k):
    """Leading k eigenpairs from the thin-QR + small-SVD route.

    `x` is the centered, scaled factor from `center_scale`.  Returns an
    EigenBundle whose beta columns carry unit D^(1/2)-norm and the
    deterministic sign orientation.
    """
    x = np.asarray(x, dtype=np.float64)
    n, r = x.shape
    if not 1 <= k <= r:
        raise ValueError(f"k must be in [1, {r}], got {k}")
    try:
        q, rx = np.linalg.qr(x, mode="reduced")
        u, sig, _ = np.linalg.svd(rx)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"QR/SVD backend failure: {exc}") from exc
    lambdas = sig[:k] ** 2
    betas = (q @ u[:, :k]) / np.sqrt(degrees)[:, None]
    return EigenBundle(_fix_signs(betas), lambdas, np.asarray(degrees), k)


def leading_eigenpairs_original(factor, degrees, k):
    """Reference route: SVD of the factor plus a small nonsymmetric solve.

    Same contract and normalization as the proposed route; kept as an
    equivalence oracle and guarded to N <= 5000.
    """
    factor = np.asarray(factor, dtype=np.float64)
    degrees = np.asarray(degrees, dtype=np.float64)
    n, r = factor.shape
    if n > _ORACLE_MAX_N:
        raise ValueError(f"reference eigensolver limited to N <= {_ORACLE_MAX_N}")
    if not 1 <= k <= r:
        raise ValueError(f"k must be in [1, {r}], got {k}")

    u, sig, _ = np.linalg.svd(factor, full_matrices=False)
    # D^-1 M u, column by column in closed form.
    inv_d = 1.0 / degrees
    mu = (inv_d @ u) / inv_d.sum()
    w = (u - mu) * inv_d[:, None]
    small = (u.T @ w) * (sig**2)[None, :]
    vals, vecs = scipy.linalg.eig(small)
    order = np.argsort(-vals.real, kind="stable")[:k]
    vals = vals[order]
    if np.any(np.abs(vals.imag) > 1e-10 * np.maximum(1.0, np.abs(vals.real))):
        raise FactorizationError("complex-pair leakage in reference eigensolve")
    lambdas = vals.real.copy()
    if np.any(lambdas < -1e-10):
        raise FactorizationError("negative eigenvalue in reference eigensolve")
    np.maximum(lambdas, 0.0, out=lambdas)

    betas = u @ vecs[:, order].real
    # Match the proposed route's normalization: unit D^(1/2)-norm columns.
    alpha_norms = np.sqrt(np.sum(betas * betas * degrees[:, None], axis=0))
    alpha_norms[alpha_norms == 0] = 1.0
    betas /= alpha_norms
    return EigenBundle(_fix_signs(betas), lambdas, degrees, k)
