"""Command-line interface.

Subcommands: gen-spiral, train, predict, tune, bench, segment.  Every command
exits 0 on success and nonzero with a one-line `error: <Class>: message` on
standard error otherwise.  The KSC_THREADS environment variable caps BLAS
worker threads; it is applied here before the numeric stack is imported.
"""

import os
import sys


def _cap_threads():
    cap = os.environ.get("KSC_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                    "BLIS_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)


_cap_threads()

import argparse
import time

import numpy as np

from . import data as data_mod
from . import images as images_mod
from . import metrics
from . import model as model_mod
from . import model_io
from . import selection
from .errors import KscError
from .kernels import KernelSpec


def _parse_grid(text):
    """Parse "lo:hi:steps:lin|log" into a list of parameter values."""
    parts = text.split(":")
    if len(parts) != 4 or parts[3] not in ("lin", "log"):
        raise ValueError(f"bad grid spec {text!r}; expected lo:hi:steps:lin|log")
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 1:
        raise ValueError("grid needs at least one step")
    if steps == 1:
        return [lo]
    if parts[3] == "log":
        return list(np.geomspace(lo, hi, steps))
    return list(np.linspace(lo, hi, steps))


def _kernel_from_args(args):
    kind = {"rbf": "rbf", "chi2": "chi2"}[args.kernel]
    return KernelSpec(kind, args.param)


def cmd_gen_spiral(args):
    ds = data_mod.generate_two_spirals(args.n, noise=args.noise, seed=args.seed)
    data_mod.save_csv(args.out, ds)
    print(f"wrote {len(ds)} labeled rows to {args.out}")
    return 0


def cmd_train(args):
    ds = data_mod.load_csv(args.data, labeled=args.labeled)
    config = model_mod.TrainConfig(
        k_clusters=args.k,
        kernel=_kernel_from_args(args),
        eps_tol=args.eps_tol,
        r_max=args.rmax,
        n_tr=args.ntr,
        seed=args.seed,
        encoding=args.encoding,
        bias_variant=args.bias,
    )
    t0 = time.perf_counter()
    mdl, det = model_mod.train(ds.rows, config, details=True)
    seconds = time.perf_counter() - t0
    model_io.save_model(args.model, mdl)
    print(f"rank {det.rank}")
    print(f"train_seconds {seconds:.3f}")
    for i, lam in enumerate(det.lambdas, start=1):
        print(f"lambda_{i} {lam:.12g}")
    return 0


def cmd_predict(args):
    mdl = model_io.load_model(args.model)
    ds = data_mod.load_csv(args.data, labeled=args.labeled)
    t0 = time.perf_counter()
    if len(ds) and ds.rows.shape[1] != mdl.reduced_points.shape[1]:
        raise ValueError(
            f"data dimension {ds.rows.shape[1]} does not match model dimension "
            f"{mdl.reduced_points.shape[1]}"
        )
    labels = model_mod.assign(mdl, model_mod.scores(mdl, ds.rows))
    seconds = time.perf_counter() - t0
    data_mod.save_labels(args.out, labels)
    print(f"test_seconds {seconds:.3f}")
    return 0


def _write_tune_report(path, report):
    with open(path, "w") as fh:
        fh.write("# k,param,criterion,r,seconds\n")
        for g in report.grid:
            fh.write(f"{g.k},{g.param:.17g},{g.value:.17g},{g.r_used},{g.seconds:.3f}\n")
            if g.error:
                fh.write(f"# failed: {g.error}\n")
        for g in report.blf_followup:
            fh.write(f"# blf-check k={g.k} param={g.param:.17g} value={g.value:.17g}\n")
        fh.write(f"# best k={report.best[0]} param={report.best[1]:.17g}\n")


def cmd_tune(args):
    ds = data_mod.load_csv(args.data, labeled=args.labeled)
    if args.criterion == selection.BAS and args.kmin < 3:
        raise ValueError("BAS requires K > 2; raise --kmin or use --criterion blf")
    config = selection.TuneConfig(
        kernel_kind=args.kernel,
        n_tr=args.ntr,
        n_val=args.nval,
        eps_tol=args.eps_tol,
        r_max=args.rmax,
        seed=args.seed,
        criterion=args.criterion,
        eta=args.eta,
    )
    report = selection.tune(ds.rows, range(args.kmin, args.kmax + 1),
                            _parse_grid(args.grid), config)
    _write_tune_report(args.out, report)
    print(f"best k {report.best[0]}")
    print(f"best param {report.best[1]:.17g}")
    return 0


def cmd_bench(args):
    ds = data_mod.load_csv(args.data, labeled=True)
    if ds.labels is None:
        raise ValueError("benchmark needs a labeled data file")
    ntr_list = [int(v) for v in args.ntr_list.split(",")]
    r_list = [int(v) for v in args.r_list.split(",")]
    if len(ntr_list) != len(r_list):
        raise ValueError("--ntr-list and --r-list must have the same length")
    rows = []
    for n_tr, r in zip(ntr_list, r_list):
        train_times, test_times, aris = [], [], []
        for rep in range(args.repeats):
            config = model_mod.TrainConfig(
                k_clusters=args.k,
                kernel=_kernel_from_args(args),
                eps_tol=args.eps_tol,
                r_max=r,
                n_tr=n_tr,
                seed=args.seed + rep,
            )
            t0 = time.perf_counter()
            mdl = model_mod.train(ds.rows, config)
            t1 = time.perf_counter()
            labels = model_mod.assign(mdl, model_mod.scores(mdl, ds.rows))
            t2 = time.perf_counter()
            train_times.append(t1 - t0)
            test_times.append(t2 - t1)
            aris.append(metrics.adjusted_rand_index(labels, ds.labels))
        rows.append((n_tr, r, float(np.mean(train_times)), float(np.mean(test_times)),
                     float(np.mean(aris)), float(np.std(aris)), args.repeats))
        print(f"n_tr={n_tr} r={r} ari_mean={rows[-1][4]:.4f}")
    with open(args.out, "w") as fh:
        fh.write("# n_tr,r,train_seconds,test_seconds,ari_mean,ari_std,repeats\n")
        for row in rows:
            fh.write(f"{row[0]},{row[1]},{row[2]:.6f},{row[3]:.6f},"
                     f"{row[4]:.17g},{row[5]:.17g},{row[6]}\n")
    return 0


def cmd_segment(args):
    image = images_mod.read_ppm(args.image)
    hist = images_mod.image_to_histogram_dataset(image, window=args.window,
                                                 levels=args.levels)
    if args.auto_tune:
        config = selection.TuneConfig(
            kernel_kind="chi2",
            n_tr=args.ntr,
            n_val=args.nval,
            eps_tol=args.eps_tol,
            r_max=args.rmax,
            seed=args.seed,
            criterion=args.criterion,
            eta=args.eta,
        )
        report = selection.tune(hist, range(args.kmin, args.kmax + 1),
                                _parse_grid(args.grid), config)
        k, param = report.best
        print(f"tuned k {k}")
        print(f"tuned param {param:.17g}")
    else:
        if args.k is None or args.param is None:
            raise ValueError("either give --k and --param or use --auto-tune")
        k, param = args.k, args.param
    config = model_mod.TrainConfig(
        k_clusters=k,
        kernel=KernelSpec("chi2", param),
        eps_tol=args.eps_tol,
        r_max=args.rmax,
        n_tr=args.ntr,
        seed=args.seed,
    )
    t0 = time.perf_counter()
    mdl, det = model_mod.train(hist, config, details=True)
    t1 = time.perf_counter()
    labels = model_mod.assign(mdl, model_mod.scores(mdl, hist))
    t2 = time.perf_counter()
    images_mod.write_pgm(args.out, labels.reshape(image.height, image.width))
    print(f"rank {det.rank}")
    print(f"train_seconds {t1 - t0:.3f}")
    print(f"test_seconds {t2 - t1:.3f}")
    if args.truth:
        truth = images_mod.read_pgm(args.truth)
        if truth.shape != (image.height, image.width):
            raise ValueError("truth map dimensions do not match the image")
        f = metrics.pairwise_f_measure(labels, truth.ravel())
        print(f"f_measure {f:.6f}")
    return 0


def _add_common_train_flags(p):
    p.add_argument("--eps-tol", type=float, default=1e-3, dest="eps_tol")
    p.add_argument("--rmax", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="sparseksc",
                                     description="Sparse kernel spectral clustering")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-spiral", help="generate the two-spiral benchmark data")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_spiral)

    p = sub.add_parser("train", help="train a sparse clustering model")
    p.add_argument("--data", required=True)
    p.add_argument("--labeled", action="store_true",
                   help="input has a trailing integer label column (ignored)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kernel", choices=["rbf", "chi2"], default="rbf")
    p.add_argument("--param", type=float, required=True)
    p.add_argument("--ntr", type=int, default=0, help="training subsample size (0: all rows)")
    p.add_argument("--encoding", choices=["sign", "direction"], default="sign")
    p.add_argument("--bias", choices=["proposed", "original"], default="proposed")
    p.add_argument("--model", required=True, help="output model file")
    _add_common_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="assign cluster labels with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--labeled", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("tune", help="grid search over K and the kernel parameter")
    p.add_argument("--data", required=True)
    p.add_argument("--labeled", action="store_true")
    p.add_argument("--kernel", choices=["rbf", "chi2"], default="rbf")
    p.add_argument("--kmin", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--grid", required=True, help="lo:hi:steps:lin|log")
    p.add_argument("--criterion", choices=["blf", "bas"], default="blf")
    p.add_argument("--eta", type=float, default=0.75)
    p.add_argument("--ntr", type=int, required=True)
    p.add_argument("--nval", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_common_train_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("bench", help="timing/quality sweep over (n_tr, R) pairs")
    p.add_argument("--data", required=True, help="labeled CSV")
    p.add_argument("--ntr-list", required=True, dest="ntr_list")
    p.add_argument("--r-list", required=True, dest="r_list")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--kernel", choices=["rbf", "chi2"], default="rbf")
    p.add_argument("--param", type=float, required=True)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--out", required=True)
    _add_common_train_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("segment", help="cluster the pixels of a PPM image")
    p.add_argument("--image", required=True, help="binary PPM (P6) input")
    p.add_argument("--k", type=int)
    p.add_argument("--param", type=float)
    p.add_argument("--auto-tune", action="store_true", dest="auto_tune")
    p.add_argument("--kmin", type=int, default=3)
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--grid", default="0.001:1.0:8:log")
    p.add_argument("--criterion", choices=["blf", "bas"], default="bas")
    p.add_argument("--eta", type=float, default=0.75)
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--ntr", type=int, default=10000)
    p.add_argument("--nval", type=int, default=20000)
    p.add_argument("--out", required=True, help="output PGM label map")
    p.add_argument("--truth", help="optional PGM region-id map for scoring")
    _add_common_train_flags(p)
    p.set_defaults(func=cmd_segment)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KscError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
