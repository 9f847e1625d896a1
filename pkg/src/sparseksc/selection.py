"""Model-selection criteria and hyper-parameter grid search.

Both criteria mix a fit term with a cluster-balance term,

    criterion = eta * fit + (1 - eta) * min_p n_p / max_p n_p,

and live in [0, 1].  The fit terms used here are this package's own
definitions:

* Balanced line fit (BLF).  For K > 2 the per-cluster fit is
  (zeta_1/sum(zeta) - 1/(K-1)) * (K-1)/(K-2) where zeta are the eigenvalues
  of the cluster's score covariance: 1 for perfectly collinear score points,
  0 for isotropic ones.  For K = 2 the scores are one-dimensional and the
  per-cluster fit is |mu| / (|mu| + std).  Cluster terms are averaged with
  weights n_p / N.
* Balanced angular similarity (BAS), defined for K > 2 only: the weighted
  mean cosine between each cluster's score rows and that cluster's unit
  prototype direction.

An empty cluster makes either criterion 0 (the worst value); a singleton or
fully degenerate cluster counts as perfectly fit.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import model as model_mod
from .errors import KscError
from .kernels import KernelSpec

BLF = "blf"
BAS = "bas"


@dataclass
class TuneConfig:
    kernel_kind: str
    n_tr: int
    n_val: int
    eps_tol: float = 1e-3
    r_max: int = 500
    seed: int = 0
    criterion: str = BLF
    eta: float = 0.75


@dataclass
class GridPoint:
    k: int
    param: float
    value: float
    r_used: int
    seed: int
    seconds: float
    error: str = ""


@dataclass
class TuneReport:
    grid: list
    best: tuple
    criterion: str
    eta: float
    blf_followup: list = field(default_factory=list)


def _balance(counts):
    return counts.min() / counts.max()


def _cluster_counts(labels, k_clusters):
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= k_clusters):
        raise ValueError("labels out of range for the given cluster count")
    return np.bincount(labels, minlength=k_clusters)


def blf_criterion(val_scores, labels, k_clusters, eta=0.75):
    """Balanced line fit of labeled score rows; returns a value in [0, 1]."""
    val_scores = np.asarray(val_scores, dtype=np.float64)
    if k_clusters < 2:
        raise ValueError("need at least 2 clusters")
    counts = _cluster_counts(labels, k_clusters)
    if counts.min() == 0:
        return 0.0
    n = val_scores.shape[0]
    linefit = 0.0
    for p in range(k_clusters):
        member = val_scores[labels == p]
        if member.shape[0] == 1:
            fit_p = 1.0
        elif k_clusters == 2:
            mu = abs(member[:, 0].mean())
            sd = member[:, 0].std()
            fit_p = 1.0 if mu + sd <= 1e-300 else mu / (mu + sd)
        else:
            centered = member - member.mean(axis=0)
            scatter = centered.T @ centered
            total = np.trace(scatter)
            if total <= 1e-300:
                fit_p = 1.0
            else:
                zeta1 = np.linalg.eigvalsh(scatter)[-1]
                fit_p = (zeta1 / total - 1.0 / (k_clusters - 1)) * (k_clusters - 1) / (k_clusters - 2)
        linefit += counts[p] / n * fit_p
    return eta * linefit + (1.0 - eta) * _balance(counts)


def bas_criterion(val_scores, labels, prototypes, eta=0.75):
    """Balanced angular similarity of labeled score rows; K > 2 only."""
    prototypes = np.asarray(prototypes, dtype=np.float64)
    k_clusters = prototypes.shape[0]
    if k_clusters < 3:
        raise ValueError("balanced angular similarity is defined for K > 2; use blf_criterion")
    val_scores = np.asarray(val_scores, dtype=np.float64)
    counts = _cluster_counts(labels, k_clusters)
    if counts.min() == 0:
        return 0.0
    n = val_scores.shape[0]
    norms = np.linalg.norm(val_scores, axis=1)
    unit = val_scores / np.where(norms > 0, norms, 1.0)[:, None]
    angular = 0.0
    for p in range(k_clusters):
        cos = unit[labels == p] @ prototypes[p]
        angular += counts[p] / n * cos.mean()
    return eta * angular + (1.0 - eta) * _balance(counts)


def _evaluate_point(train_rows, val_rows, k, param, config):
    t0 = time.perf_counter()
    kernel = KernelSpec(config.kernel_kind, param)
    encoding = model_mod.DIRECTION if config.criterion == BAS else model_mod.SIGN
    mdl, det = model_mod.fit_model(
        train_rows, k, kernel, config.eps_tol, config.r_max,
        encoding=encoding, seed=config.seed,
    )
    val_scores = model_mod.scores(mdl, val_rows)
    labels = model_mod.assign(mdl, val_scores)
    if config.criterion == BAS:
        value = bas_criterion(val_scores, labels, mdl.prototypes, config.eta)
    else:
        value = blf_criterion(val_scores, labels, k, config.eta)
    return value, det.rank, time.perf_counter() - t0


def tune(rows, k_range, param_grid, config):
    """Grid search over (K, kernel parameter) on a fixed train/validation split.

    One seeded shuffle yields disjoint training and validation subsets that
    are reused across all grid points, so criterion differences reflect the
    hyper-parameters only.  A failed training run scores -inf and carries the
    failure reason.  Ties resolve toward smaller K, then smaller parameter.

    When tuning with BAS and the winner has K = 3, BLF is additionally
    evaluated at K = 2 and 3 (BAS cannot see a two-cluster split) and K = 2
    wins if its BLF value is higher; those follow-up rows are reported in
    `blf_followup`.
    """
    rows = np.asarray(rows, dtype=np.float64)
    k_range = list(k_range)
    param_grid = list(param_grid)
    if not k_range or not param_grid:
        raise ValueError("empty tuning grid")
    if config.criterion == BAS and min(k_range) < 3:
        raise ValueError("balanced angular similarity requires K > 2")
    if config.n_tr + config.n_val > rows.shape[0]:
        raise ValueError("n_tr + n_val exceeds the data size")

    order = np.random.default_rng(config.seed).permutation(rows.shape[0])
    train_rows = rows[order[: config.n_tr]]
    val_rows = rows[order[config.n_tr : config.n_tr + config.n_val]]

    grid = []
    for k in k_range:
        for param in param_grid:
            try:
                value, r_used, secs = _evaluate_point(train_rows, val_rows, k, param, config)
                grid.append(GridPoint(k, param, value, r_used, config.seed, secs))
            except (KscError, np.linalg.LinAlgError) as exc:
                grid.append(GridPoint(k, param, float("-inf"), 0, config.seed, 0.0,
                                       error=f"{type(exc).__name__}: {exc}"))

    ranked = sorted(grid, key=lambda g: (-g.value, g.k, g.param))
    best = (ranked[0].k, ranked[0].param)
    if not np.isfinite(ranked[0].value):
        raise KscError("every grid point failed to train")

    followup = []
    if config.criterion == BAS and best[0] == 3:
        blf_cfg = TuneConfig(config.kernel_kind, config.n_tr, config.n_val,
                             config.eps_tol, config.r_max, config.seed, BLF, config.eta)
        for k in (2, 3):
            try:
                value, r_used, secs = _evaluate_point(train_rows, val_rows, k, best[1], blf_cfg)
                followup.append(GridPoint(k, best[1], value, r_used, config.seed, secs))
            except (KscError, np.linalg.LinAlgError) as exc:
                followup.append(GridPoint(k, best[1], float("-inf"), 0, config.seed, 0.0,
                                           error=f"{type(exc).__name__}: {exc}"))
        if len(followup) == 2 and followup[0].value > followup[1].value:
            best = (2, best[1])

    return TuneReport(grid=grid, best=best, criterion=config.criterion,
                      eta=config.eta, blf_followup=followup)
