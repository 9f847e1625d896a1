"""Dataset container, synthetic spiral generator, and CSV round-trip."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class Dataset:
    """Feature rows (N x d) with optional integer labels of length N."""

    rows: np.ndarray
    labels: np.ndarray = None

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("dataset contains non-finite values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape[0] != self.rows.shape[0]:
                raise ValueError("label count does not match row count")

    def __len__(self):
        return self.rows.shape[0]


def _arc_length_table(a, b, theta0, theta1, resolution=4096):
    # Cumulative arc length of r = a + b*theta on a dense grid, used to draw
    # positions uniformly along the curve rather than in the angle.
    theta = np.linspace(theta0, theta1, resolution)
    speed = np.sqrt((a + b * theta) ** 2 + b * b)
    ds = np.diff(theta) * 0.5 * (speed[:-1] + speed[1:])
    s = np.concatenate([[0.0], np.cumsum(ds)])
    return theta, s


def generate_two_spirals(n, noise=0.02, seed=0, a=0.2, b=0.1, theta0=math.pi / 2, turns=2.5):
    """Two intertwined spiral arms with 0/1 arm labels.

    Both arms follow r = a + b*theta over `turns` full revolutions starting at
    `theta0`; the second arm is rotated by pi.  Points are drawn uniformly in
    arc length (ceil(n/2) on arm 0, floor(n/2) on arm 1) and isotropic
    Gaussian noise of the given standard deviation is added.  The defaults
    span a bounding box of roughly [-2, 2] squared, which puts the arm
    separation and arc length at the scale the stock RBF bandwidths (around
    0.006) and reduced-set sizes (around 200) are calibrated for.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    theta_grid, s_grid = _arc_length_table(a, b, theta0, theta0 + turns * 2 * math.pi)
    counts = (n - n // 2, n // 2)
    rows = np.empty((n, 2))
    labels = np.empty(n, dtype=np.int64)
    start = 0
    for arm, count in enumerate(counts):
        s = rng.uniform(0.0, s_grid[-1], size=count)
        theta = np.interp(s, s_grid, theta_grid)
        r = a + b * theta
        phase = theta + arm * math.pi
        rows[start : start + count, 0] = r * np.cos(phase)
        rows[start : start + count, 1] = r * np.sin(phase)
        labels[start : start + count] = arm
        start += count
    if noise > 0:
        rows += rng.normal(0.0, noise, size=rows.shape)
    return Dataset(rows, labels)


def save_csv(path, dataset):
    """Comma-separated rows, 17 significant digits, label column appended
    when the dataset is labeled."""
    with open(path, "w") as fh:
        for i in range(len(dataset)):
            fields = [format(v, ".17g") for v in dataset.rows[i]]
            if dataset.labels is not None:
                fields.append(str(int(dataset.labels[i])))
            fh.write(",".join(fields) + "\n")


def load_csv(path, labeled=False):
    """Read a numeric CSV (no header); with `labeled` the trailing column is
    parsed as integer labels.  Malformed rows are reported by line number."""
    raw = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
                if labeled and width < 2:
                    raise ValueError(f"line {lineno}: labeled file needs >= 2 columns")
            elif len(fields) != width:
                raise ValueError(
                    f"line {lineno}: expected {width} fields, found {len(fields)}"
                )
            try:
                raw.append([float(f) for f in fields])
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric field in {line!r}") from None
    if not raw:
        return Dataset(np.zeros((0, 0)))
    data = np.array(raw)
    if labeled:
        labels = data[:, -1]
        if np.any(labels != np.round(labels)):
            raise ValueError("label column contains non-integer values")
        return Dataset(data[:, :-1], labels.astype(np.int64))
    return Dataset(data)


def save_labels(path, labels):
    """One integer label per line."""
    with open(path, "w") as fh:
        for v in np.asarray(labels):
            fh.write(f"{int(v)}\n")


def load_labels(path):
    with open(path) as fh:
        return np.array([int(line) for line in fh if line.strip()], dtype=np.int64)
