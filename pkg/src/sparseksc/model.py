"""Sparse kernel spectral clustering model: construction and assignment.

A trained model keeps only the R reduced-set points (the pivot rows picked by
the incomplete Cholesky decomposition), one coefficient column per score
dimension, the bias terms that center the score space, and the cluster
prototypes.  Scoring a point therefore costs O(R) kernel evaluations no
matter how large the training set was.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .eigensolve import approx_degrees, center_scale, leading_eigenpairs_proposed
from .errors import DegreeError, EncodingError, FactorizationError
from .icd import icd
from .kernels import KernelSpec, kernel_cross

SIGN = "sign"
DIRECTION = "direction"
BIAS_PROPOSED = "proposed"
BIAS_ORIGINAL = "original"

_SCORE_CHUNK = 16384


@dataclass
class SparseKscModel:
    """Reduced-set clustering model.

    `codebook` holds K distinct sign patterns (sign encoding) and
    `prototypes` K unit-norm score-space directions (direction encoding);
    exactly one of the two is set.
    """

    reduced_points: np.ndarray
    xi: np.ndarray
    bias: np.ndarray
    kernel: KernelSpec
    k_clusters: int
    encoding: str = SIGN
    codebook: np.ndarray = None
    prototypes: np.ndarray = None
    bias_variant: str = BIAS_PROPOSED
    n_tr: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.k_clusters < 2:
            raise ValueError("need at least 2 clusters")
        if self.encoding not in (SIGN, DIRECTION):
            raise ValueError(f"unknown encoding {self.encoding!r}")
        if self.xi.shape != (self.reduced_points.shape[0], self.k_clusters - 1):
            raise ValueError("coefficient matrix shape mismatch")

    @property
    def rank(self):
        return self.reduced_points.shape[0]


@dataclass
class TrainConfig:
    k_clusters: int
    kernel: KernelSpec
    eps_tol: float = 1e-3
    r_max: int = 500
    n_tr: int = 0  # 0 means: use the full data set
    seed: int = 0
    encoding: str = SIGN
    bias_variant: str = BIAS_PROPOSED


@dataclass
class TrainDetails:
    """Diagnostics from one training run (not persisted with the model)."""

    lambdas: np.ndarray
    rank: int
    residual_trace: list
    eps_final: float
    train_indices: np.ndarray = None
    train_scores: np.ndarray = None
    train_seconds: float = 0.0


def solve_reduced_coefficients(k_rr, k_rt, betas):
    """Solve K_RR xi = K_RT beta, one column per score dimension.

    K_RR is factorized as symmetric positive definite; if that fails a ridge
    of 1e-10 * tr(K_RR)/R is added once before giving up.
    """
    k_rr = np.asarray(k_rr, dtype=np.float64)
    k_rt = np.asarray(k_rt, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    r = k_rr.shape[0]
    if k_rr.shape != (r, r) or k_rt.shape[0] != r or k_rt.shape[1] != betas.shape[0]:
        raise ValueError("inconsistent shapes in reduced-coefficient solve")
    rhs = k_rt @ betas
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(k_rr, lower=True), rhs)
    except np.linalg.LinAlgError:
        pass
    ridge = 1e-10 * np.trace(k_rr) / r
    try:
        return scipy.linalg.cho_solve(
            scipy.linalg.cho_factor(k_rr + ridge * np.eye(r), lower=True), rhs
        )
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"reduced-set system singular even with ridge: {exc}") from exc


def bias_terms_proposed(lambdas, betas, degrees, n_tr):
    """Bias from the optimality conditions of the full (approximated) problem:
    b_k = (lambda_k - 1) * sum_i d_i beta_ik / n_tr.

    Uses the degrees of the whole training set, so its accuracy does not hinge
    on the reduced-set size.
    """
    lambdas = np.asarray(lambdas, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    degrees = np.asarray(degrees, dtype=np.float64)
    if betas.shape != (degrees.shape[0], lambdas.shape[0]):
        raise ValueError("inconsistent shapes in bias computation")
    return (lambdas - 1.0) * (degrees @ betas) / float(n_tr)


def bias_terms_original(xi, k_rr):
    """Bias estimated from the reduced set alone:
    b_k = -1^T D_R^-1 K_RR xi_k / (1^T D_R^-1 1) with diag(D_R) = K_RR 1.

    Retained for sparsity comparisons against `bias_terms_proposed`.
    """
    xi = np.asarray(xi, dtype=np.float64)
    k_rr = np.asarray(k_rr, dtype=np.float64)
    deg = k_rr @ np.ones(k_rr.shape[0])
    if np.any(deg <= 0):
        raise DegreeError("nonpositive reduced-set degree")
    inv = 1.0 / deg
    return -(inv @ (k_rr @ xi)) / inv.sum()


def scores(model, points):
    """Score-space coordinates of `points`, one (K-1)-vector per row.

    Evaluates kernels against the reduced set only, in chunks, so cost and
    memory are O(R) per point.
    """
    points = np.asarray(points, dtype=np.float64)
    k1 = model.k_clusters - 1
    if points.shape[0] == 0:
        return np.zeros((0, k1))
    if points.ndim != 2 or points.shape[1] != model.reduced_points.shape[1]:
        raise ValueError(
            f"points have dimension {points.shape[1] if points.ndim == 2 else '?'}, "
            f"model expects {model.reduced_points.shape[1]}"
        )
    out = np.empty((points.shape[0], k1))
    for lo in range(0, points.shape[0], _SCORE_CHUNK):
        hi = min(lo + _SCORE_CHUNK, points.shape[0])
        out[lo:hi] = kernel_cross(model.kernel, points[lo:hi], model.reduced_points) @ model.xi
    out += model.bias
    return out


def _sign_patterns(score_rows):
    # sign(0) counts as +.
    return np.where(np.asarray(score_rows) >= 0, 1, -1).astype(np.int8)


def _hamming_labels(patterns, codebook):
    dist = (patterns[:, None, :] != codebook[None, :, :]).sum(axis=2)
    return np.argmin(dist, axis=1)


def fit_prototypes(train_scores, encoding, k_clusters):
    """Build the cluster decoder from training scores.

    Sign encoding: the K most frequent sign patterns of the score rows
    (ties broken toward the lexicographically smaller pattern).  Direction
    encoding: rows are grouped by nearest sign pattern and each group's mean,
    normalized to unit length, becomes the cluster direction.

    Returns the codebook for sign encoding, the prototypes for direction.
    """
    train_scores = np.asarray(train_scores, dtype=np.float64)
    patterns = _sign_patterns(train_scores)
    unique, counts = np.unique(patterns, axis=0, return_counts=True)
    if unique.shape[0] < k_clusters:
        raise EncodingError(
            f"only {unique.shape[0]} distinct sign patterns in the training scores "
            f"but {k_clusters} clusters requested; the model is mis-sized"
        )
    top = np.argsort(-counts, kind="stable")[:k_clusters]
    codebook = unique[top]
    if encoding == SIGN:
        return codebook
    labels = _hamming_labels(patterns, codebook)
    prototypes = np.empty((k_clusters, train_scores.shape[1]))
    for p in range(k_clusters):
        mean = train_scores[labels == p].mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm <= 1e-300:
            raise EncodingError(f"cluster {p} has a zero mean score direction")
        prototypes[p] = mean / norm
    return prototypes


def assign(model, score_rows):
    """Cluster labels for score-space rows.

    Sign encoding decodes by minimal Hamming distance to the codebook,
    direction encoding by maximal cosine similarity to the prototypes; ties
    resolve to the lowest cluster index.
    """
    score_rows = np.asarray(score_rows, dtype=np.float64)
    if score_rows.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    if model.encoding == SIGN:
        return _hamming_labels(_sign_patterns(score_rows), model.codebook).astype(np.int64)
    norms = np.linalg.norm(score_rows, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    sims = (score_rows / safe[:, None]) @ model.prototypes.T
    return np.argmax(sims, axis=1).astype(np.int64)


def fit_model(train_rows, k_clusters, kernel, eps_tol, r_max, encoding=SIGN,
              bias_variant=BIAS_PROPOSED, n_tr_label=None, seed=0):
    """Run the full training pipeline on an explicit training matrix.

    Decomposition -> degrees -> centering -> eigenpairs -> reduced-set
    coefficients -> bias -> training scores -> prototypes.  Returns the model
    plus TrainDetails diagnostics.
    """
    train_rows = np.asarray(train_rows, dtype=np.float64)
    n_tr = train_rows.shape[0]
    if k_clusters < 2:
        raise ValueError("need at least 2 clusters")
    t0 = time.perf_counter()

    dec = icd(kernel, train_rows, eps_tol, r_max)
    if dec.rank < k_clusters - 1:
        raise FactorizationError(
            f"decomposition rank {dec.rank} cannot support {k_clusters - 1} score dimensions"
        )
    degrees = approx_degrees(dec.factor)
    reduced = train_rows[dec.pivots].copy()
    k_rt = kernel_cross(kernel, reduced, train_rows)
    x = center_scale(dec.factor, degrees, overwrite=True)
    bundle = leading_eigenpairs_proposed(x, degrees, k_clusters - 1)

    k_rr = kernel_cross(kernel, reduced, reduced)
    xi = solve_reduced_coefficients(k_rr, k_rt, bundle.betas)
    if bias_variant == BIAS_PROPOSED:
        bias = bias_terms_proposed(bundle.lambdas, bundle.betas, degrees, n_tr)
    elif bias_variant == BIAS_ORIGINAL:
        bias = bias_terms_original(xi, k_rr)
    else:
        raise ValueError(f"unknown bias variant {bias_variant!r}")

    train_scores = k_rt.T @ xi + bias
    proto = fit_prototypes(train_scores, encoding, k_clusters)
    model = SparseKscModel(
        reduced_points=reduced,
        xi=xi,
        bias=bias,
        kernel=kernel,
        k_clusters=k_clusters,
        encoding=encoding,
        codebook=proto if encoding == SIGN else None,
        prototypes=proto if encoding == DIRECTION else None,
        bias_variant=bias_variant,
        n_tr=n_tr_label if n_tr_label is not None else n_tr,
        seed=seed,
    )
    details = TrainDetails(
        lambdas=bundle.lambdas,
        rank=dec.rank,
        residual_trace=dec.residual_trace,
        eps_final=dec.eps_final,
        train_scores=train_scores,
        train_seconds=time.perf_counter() - t0,
    )
    return model, details


def train(rows, config, details=False):
    """Train a sparse model on a seeded uniform subsample of `rows`.

    The seed governs the subsample draw only; everything downstream is
    deterministic given the drawn rows.  With `details=True` the TrainDetails
    diagnostics are returned alongside the model.
    """
    rows = np.asarray(rows, dtype=np.float64)
    n = rows.shape[0]
    n_tr = config.n_tr if config.n_tr else n
    if n_tr > n:
        raise ValueError(f"n_tr={n_tr} exceeds data size {n}")
    idx = np.random.default_rng(config.seed).choice(n, size=n_tr, replace=False)
    model, det = fit_model(
        rows[idx],
        config.k_clusters,
        config.kernel,
        config.eps_tol,
        config.r_max,
        encoding=config.encoding,
        bias_variant=config.bias_variant,
        seed=config.seed,
    )
    det.train_indices = idx
    return (model, det) if details else model
