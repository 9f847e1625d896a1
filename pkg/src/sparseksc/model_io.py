"""Versioned text persistence for trained models.

Format (version 1): a "KSC-MODEL 1" header, key-value metadata lines, then
the REDUCED, XI, BIAS and CODEBOOK/PROTOTYPES sections.  All numbers are
written with 17 significant digits, which round-trips IEEE doubles exactly,
so a reloaded model scores bit-identically.
"""

import numpy as np

from .errors import ModelFormatError
from .kernels import KernelSpec
from .model import DIRECTION, SIGN, SparseKscModel

_HEADER = "KSC-MODEL 1"


def _fmt_row(values):
    return " ".join(format(float(v), ".17g") for v in values)


def save_model(path, model):
    lines = [
        _HEADER,
        f"kernel {model.kernel.kind}",
        f"param {format(model.kernel.param, '.17g')}",
        f"k {model.k_clusters}",
        f"encoding {model.encoding}",
        f"bias {model.bias_variant}",
        f"r {model.rank}",
        f"d {model.reduced_points.shape[1]}",
        f"ntr {model.n_tr}",
        f"seed {model.seed}",
        "REDUCED",
    ]
    lines += [_fmt_row(row) for row in model.reduced_points]
    lines.append("XI")
    lines += [_fmt_row(row) for row in model.xi]
    lines.append("BIAS")
    lines.append(_fmt_row(model.bias))
    if model.encoding == SIGN:
        lines.append("CODEBOOK")
        lines += [_fmt_row(row) for row in model.codebook]
    else:
        lines.append("PROTOTYPES")
        lines += [_fmt_row(row) for row in model.prototypes]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_block(lines, pos, name, rows, cols):
    if pos >= len(lines) or lines[pos] != name:
        raise ModelFormatError(f"expected section {name}")
    pos += 1
    if pos + rows > len(lines):
        raise ModelFormatError(f"section {name} truncated")
    try:
        block = np.array(
            [[float(v) for v in lines[pos + i].split()] for i in range(rows)]
        )
    except ValueError:
        raise ModelFormatError(f"section {name} contains a non-numeric field") from None
    if block.shape != (rows, cols):
        raise ModelFormatError(
            f"section {name} has shape {block.shape}, expected {(rows, cols)}"
        )
    if not np.all(np.isfinite(block)):
        raise ModelFormatError(f"section {name} contains non-finite numbers")
    return block, pos + rows


def load_model(path):
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh]
    lines = [line for line in lines if line.strip()]
    if not lines or lines[0] != _HEADER:
        raise ModelFormatError(f"unsupported model header: {lines[0] if lines else '(empty)'!r}")

    meta = {}
    pos = 1
    while pos < len(lines) and lines[pos] != "REDUCED":
        parts = lines[pos].split(None, 1)
        if len(parts) != 2:
            raise ModelFormatError(f"malformed metadata line: {lines[pos]!r}")
        meta[parts[0]] = parts[1]
        pos += 1
    try:
        kernel = KernelSpec(meta["kernel"], float(meta["param"]))
        k = int(meta["k"])
        encoding = meta["encoding"]
        bias_variant = meta["bias"]
        r = int(meta["r"])
        d = int(meta["d"])
        n_tr = int(meta["ntr"])
        seed = int(meta["seed"])
    except KeyError as exc:
        raise ModelFormatError(f"missing metadata key {exc}") from None
    except ValueError as exc:
        raise ModelFormatError(f"bad metadata value: {exc}") from None
    if encoding not in (SIGN, DIRECTION):
        raise ModelFormatError(f"unknown encoding {encoding!r}")

    reduced, pos = _parse_block(lines, pos, "REDUCED", r, d)
    xi, pos = _parse_block(lines, pos, "XI", r, k - 1)
    bias, pos = _parse_block(lines, pos, "BIAS", 1, k - 1)
    section = "CODEBOOK" if encoding == SIGN else "PROTOTYPES"
    proto, pos = _parse_block(lines, pos, section, k, k - 1)
    if pos != len(lines):
        raise ModelFormatError("trailing data after final section")

    return SparseKscModel(
        reduced_points=reduced,
        xi=xi,
        bias=bias[0],
        kernel=kernel,
        k_clusters=k,
        encoding=encoding,
        codebook=proto.astype(np.int8) if encoding == SIGN else None,
        prototypes=proto if encoding == DIRECTION else None,
        bias_variant=bias_variant,
        n_tr=n_tr,
        seed=seed,
    )
