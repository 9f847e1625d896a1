"""Incomplete Cholesky decomposition of a kernel matrix with greedy pivoting.

The decomposition never materializes the full N x N kernel matrix: it keeps
only the running residual diagonal and the N x R factor built so far, so peak
auxiliary storage is O(N * R).  At every step the pivot is the index with the
maximal residual diagonal entry (ties broken toward the lowest index, which
makes the pivot sequence deterministic), the corresponding exact kernel column
is evaluated, downdated against the factor columns already produced, and the
residual trace is recorded.

Termination happens at the first of:

* relative residual trace  Tr(residual) / Tr(K)  <=  eps_tol,
* rank limit r_max reached,
* residual diagonal maximum <= 1e-12 (the matrix is numerically low rank;
  this is a successful stop, not an error).

`eps_tol` is interpreted as a RELATIVE trace tolerance, which makes it
scale-free in N for unit-diagonal kernels.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import FactorizationError
from .kernels import kernel_column, kernel_cross, kernel_eval

# Residual diagonal entries at or below this are treated as exhausted rank.
DIAG_FLOOR = 1e-12

_ORACLE_MAX_N = 2000


@dataclass
class IcdResult:
    """Rank-R factor with its pivot (reduced set) indices and trace history.

    ``factor @ factor.T`` approximates the kernel matrix with trace-norm error
    ``residual_trace[-1]``; ``residual_trace`` holds the residual trace before
    each step plus the final value, and ``eps_final`` is the final value
    relative to the full trace.
    """

    factor: np.ndarray
    pivots: list = field(default_factory=list)
    residual_trace: list = field(default_factory=list)
    eps_final: float = 0.0

    @property
    def rank(self):
        return len(self.pivots)


def _self_diagonal(spec, rows):
    # K(x, x) = 1 exactly for both supported kernels (kernel_eval contract);
    # spot-check one entry so a future non-unit kernel fails loudly here.
    n = rows.shape[0]
    if n and abs(kernel_eval(spec, rows[0], rows[0]) - 1.0) > 0:
        raise FactorizationError("kernel self-similarity is not exactly 1")
    return np.ones(n)


def icd(spec, rows, eps_tol, r_max):
    """Greedy pivoted incomplete Cholesky of the kernel matrix of `rows`.

    Parameters
    ----------
    spec : KernelSpec
    rows : (N, d) array
    eps_tol : float in (0, 1)
        Relative residual-trace tolerance.
    r_max : int
        Hard rank limit, 1 <= r_max <= N.

    Returns
    -------
    IcdResult
    """
    rows = np.asarray(rows, dtype=np.float64)
    n = rows.shape[0]
    if not 0 < eps_tol < 1:
        raise ValueError(f"eps_tol must be in (0, 1), got {eps_tol}")
    if not 1 <= r_max <= n:
        raise ValueError(f"r_max must be in [1, {n}], got {r_max}")

    diag = _self_diagonal(spec, rows)
    trace_total = float(diag.sum())
    trace = [trace_total]
    pivots = []
    # Columns of the factor are kept as rows of gt so each new one is
    # contiguous; transposed into (N, R) layout on return.
    gt = np.empty((r_max, n))

    while len(pivots) < r_max and trace[-1] / trace_total > eps_tol:
        j = int(np.argmax(diag))
        dj = diag[j]
        if dj <= DIAG_FLOOR:
            break
        col = kernel_column(spec, rows, j)
        if not np.all(np.isfinite(col)):
            raise FactorizationError(f"non-finite kernel value in column {j}")
        step = len(pivots)
        if step:
            col -= gt[:step].T @ gt[:step, j]
            col[pivots] = 0.0  # exact zeros the arithmetic only approximates
        col[j] = dj
        col /= np.sqrt(dj)
        gt[step] = col
        diag -= col * col
        diag[j] = 0.0
        pivots.append(j)
        trace.append(max(float(diag.sum()), 0.0))

    factor = np.ascontiguousarray(gt[: len(pivots)].T)
    return IcdResult(
        factor=factor,
        pivots=pivots,
        residual_trace=trace,
        eps_final=trace[-1] / trace_total,
    )


def dense_pivoted_cholesky_oracle(spec, rows, floor=DIAG_FLOOR):
    """Reference decomposition that materializes the kernel matrix.

    Runs the same greedy pivot rule to full numerical rank by explicit Schur
    complements on the dense matrix.  Intended for tests and cross-checks
    only; guarded to small instances.
    """
    rows = np.asarray(rows, dtype=np.float64)
    n = rows.shape[0]
    if n > _ORACLE_MAX_N:
        raise ValueError(f"dense oracle limited to N <= {_ORACLE_MAX_N}, got {n}")

    residual = kernel_cross(spec, rows, rows)
    trace_total = float(np.trace(residual))
    trace = [trace_total]
    pivots = []
    cols = []
    for _ in range(n):
        diag = residual.diagonal()
        j = int(np.argmax(diag))
        if diag[j] <= floor:
            break
        col = residual[:, j] / np.sqrt(diag[j])
        cols.append(col)
        pivots.append(j)
        residual = residual - np.outer(col, col)
        trace.append(max(float(np.trace(residual)), 0.0))

    factor = np.array(cols).T if cols else np.empty((n, 0))
    return IcdResult(
        factor=factor,
        pivots=pivots,
        residual_trace=trace,
        eps_final=trace[-1] / trace_total if trace_total else 0.0,
    )
