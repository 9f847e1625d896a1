"""Positive-definite kernel evaluation (RBF and chi-square).

Conventions
-----------
RBF uses the kernel parameter directly in the denominator of the exponent,

    K(x, y) = exp(-||x - y||_2^2 / gamma),

NOT the exp(-||x-y||^2 / (2 sigma^2)) convention of many other libraries.
Keep this in mind when porting kernel parameters.

The chi-square kernel operates on nonnegative histogram rows,

    K(h, g) = exp(-chi2(h, g) / sigma),    chi2 = 0.5 * sum_l (h_l-g_l)^2/(h_l+g_l),

where bins with h_l + g_l = 0 contribute exactly 0 (continuity limit; shared
empty bins are routine in histogram data).
"""

from dataclasses import dataclass

import numpy as np

RBF = "rbf"
CHI2 = "chi2"

_KINDS = (RBF, CHI2)

# Rows of this many elements are processed per block in cross evaluations to
# bound temporary storage.
_BLOCK_ELEMS = 2**22


@dataclass(frozen=True)
class KernelSpec:
    """Kernel kind ("rbf" or "chi2") plus its positive bandwidth parameter."""

    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {_KINDS}")
        if not (self.param > 0):
            raise ValueError(f"kernel parameter must be > 0, got {self.param}")


def _check_hist(x, name):
    if np.any(np.asarray(x) < 0):
        raise ValueError(f"chi-square kernel requires nonnegative entries; {name} has a negative one")


def kernel_eval(spec, x, y):
    """Evaluate K(x, y) for a single pair of d-vectors; result in (0, 1].

    The squared distance is accumulated directly per component (no norm
    expansion) so duplicates evaluate to exactly 1.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if spec.kind == RBF:
        diff = x - y
        return float(np.exp(-np.dot(diff, diff) / spec.param))
    _check_hist(x, "x")
    _check_hist(y, "y")
    num = (x - y) ** 2
    den = x + y
    chi2 = 0.5 * float(np.sum(np.divide(num, den, out=np.zeros_like(num), where=den > 0)))
    return float(np.exp(-chi2 / spec.param))


def kernel_column(spec, rows, j):
    """Kernel similarities of every row of `rows` against row j.

    Entry i is K(rows[i], rows[j]); entry j is exactly 1.  Distances are
    taken directly per pair, which keeps the pivot column of an incomplete
    decomposition free of cancellation noise near duplicates.
    """
    rows = np.asarray(rows, dtype=np.float64)
    n = rows.shape[0]
    if not 0 <= j < n:
        raise ValueError(f"column index {j} out of range for {n} rows")
    y = rows[j]
    if spec.kind == RBF:
        diff = rows - y
        return np.exp(-np.einsum("ij,ij->i", diff, diff) / spec.param)
    _check_hist(rows, "rows")
    num = (rows - y) ** 2
    den = rows + y
    chi2 = 0.5 * np.sum(np.divide(num, den, out=np.zeros_like(num), where=den > 0), axis=1)
    return np.exp(-chi2 / spec.param)


def _rbf_block(a, b, param):
    # ||a-b||^2 via the gram expansion, clamped at 0 against cancellation.
    sq = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * (a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / param)


def _chi2_block(a, b, param):
    num = (a[:, None, :] - b[None, :, :]) ** 2
    den = a[:, None, :] + b[None, :, :]
    chi2 = 0.5 * np.sum(np.divide(num, den, out=np.zeros_like(num), where=den > 0), axis=2)
    return np.exp(-chi2 / param)


def kernel_cross(spec, a, b):
    """Dense |a| x |b| kernel matrix between two row sets.

    Evaluation is blocked over the rows of `a` so temporaries stay bounded.
    When `a` and `b` are the same array object the result is symmetrized
    exactly and given a unit diagonal.
    """
    same = a is b
    a = np.asarray(a, dtype=np.float64)
    b = a if same else np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    if spec.kind == CHI2:
        _check_hist(a, "a")
        if not same:
            _check_hist(b, "b")
        block_fn = _chi2_block
        step = max(1, _BLOCK_ELEMS // max(1, b.shape[0] * b.shape[1]))
    else:
        block_fn = _rbf_block
        step = max(1, _BLOCK_ELEMS // max(1, b.shape[0]))
    out = np.empty((a.shape[0], b.shape[0]))
    for lo in range(0, a.shape[0], step):
        hi = min(lo + step, a.shape[0])
        out[lo:hi] = block_fn(a[lo:hi], b, spec.param)
    if same and spec.kind == RBF:
        out += out.T
        out *= 0.5
        np.fill_diagonal(out, 1.0)
    return out
