"""Binary PPM/PGM image I/O, minimum-variance color quantization, and
per-pixel local color histogram features.

Only the binary variants (P6 / P5) with maxval 255 are supported: the headers
are trivial to parse and the payloads round-trip bit-exactly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ImageFormatError


@dataclass
class LabeledImage:
    """8-bit RGB pixels, shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError("pixels must have shape (height, width, 3)")

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


def _read_header(data, magic, path):
    if data[:2] != magic:
        raise ImageFormatError(f"{path}: expected {magic.decode()} header")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated header")
        try:
            fields.append(int(data[start:pos]))
        except ValueError:
            raise ImageFormatError(f"{path}: non-numeric header field") from None
    width, height, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"{path}: bad dimensions {width}x{height}")
    return width, height, pos + 1  # single whitespace byte before payload


def read_ppm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    width, height, offset = _read_header(data, b"P6", path)
    payload = data[offset : offset + 3 * width * height]
    if len(payload) != 3 * width * height:
        raise ImageFormatError(f"{path}: truncated pixel payload")
    return LabeledImage(np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3))


def write_ppm(path, image):
    with open(path, "wb") as fh:
        fh.write(f"P6\n{image.width} {image.height}\n255\n".encode())
        fh.write(image.pixels.tobytes())


def read_pgm(path):
    """Gray map as (height, width) uint8; used for region-id label maps."""
    with open(path, "rb") as fh:
        data = fh.read()
    width, height, offset = _read_header(data, b"P5", path)
    payload = data[offset : offset + width * height]
    if len(payload) != width * height:
        raise ImageFormatError(f"{path}: truncated pixel payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, gray):
    gray = np.asarray(gray)
    if gray.ndim != 2:
        raise ValueError("gray map must be 2-D")
    if gray.min() < 0 or gray.max() > 255:
        raise ValueError("gray values must fit in [0, 255]")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{gray.shape[1]} {gray.shape[0]}\n255\n".encode())
        fh.write(gray.astype(np.uint8).tobytes())


def _box_sse(colors, counts, members):
    c = colors[members]
    w = counts[members].astype(np.float64)
    mean = (c * w[:, None]).sum(axis=0) / w.sum()
    return float((w[:, None] * (c - mean) ** 2).sum()), mean


def _best_split(values, weights):
    # Minimal two-group weighted SSE over thresholds between consecutive
    # distinct values; returns the sorted order and the cut position (last
    # index of the left group), or None if all values are equal.
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = weights[order].astype(np.float64)
    if v[0] == v[-1]:
        return None
    cw = np.cumsum(w)
    cs = np.cumsum(w * v)
    cq = np.cumsum(w * v * v)
    total_w, total_s, total_q = cw[-1], cs[-1], cq[-1]
    cut = np.nonzero(np.diff(v))[0]  # split after these positions
    left = cq[cut] - cs[cut] ** 2 / cw[cut]
    rw = total_w - cw[cut]
    right = (total_q - cq[cut]) - (total_s - cs[cut]) ** 2 / rw
    best = int(np.argmin(left + right))  # lowest threshold on ties
    return order, int(cut[best])


def minimum_variance_quantize(image, levels):
    """Variance-minimizing greedy palette of at most `levels` colors.

    Starting from one box holding every pixel, repeatedly split the box with
    the largest total squared error: along its highest-variance channel, at
    the threshold minimizing the within-class squared error on that channel.
    Splitting stops at `levels` boxes or when every box is a single color.
    Returns (palette, index_map) with palette rows the box means and
    index_map the per-pixel box index, shape (height, width).
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    pixels = image.pixels.reshape(-1, 3)
    if pixels.shape[0] == 0:
        raise ValueError("empty image")
    packed = (
        pixels[:, 0].astype(np.uint32) << 16
    ) | (pixels[:, 1].astype(np.uint32) << 8) | pixels[:, 2].astype(np.uint32)
    codes, inverse, counts = np.unique(packed, return_inverse=True, return_counts=True)
    colors = np.stack(
        [(codes >> 16) & 0xFF, (codes >> 8) & 0xFF, codes & 0xFF], axis=1
    ).astype(np.float64)

    boxes = [np.arange(colors.shape[0])]
    while len(boxes) < levels:
        sses = [_box_sse(colors, counts, m)[0] for m in boxes]
        pick = int(np.argmax(sses))
        if sses[pick] <= 0.0:
            break
        members = boxes[pick]
        c = colors[members]
        w = counts[members].astype(np.float64)
        mean = (c * w[:, None]).sum(axis=0) / w.sum()
        var = (w[:, None] * (c - mean) ** 2).sum(axis=0)
        axis = int(np.argmax(var))
        split = _best_split(c[:, axis], w)
        if split is None:
            # highest-variance axis is constant only if all are; unreachable
            # when sse > 0, kept as a guard
            break
        order, cut = split
        left = members[order[: cut + 1]]
        right = members[order[cut + 1 :]]
        boxes[pick] = left
        boxes.append(right)

    palette = np.empty((len(boxes), 3))
    color_to_box = np.empty(colors.shape[0], dtype=np.int64)
    for b, members in enumerate(boxes):
        palette[b] = _box_sse(colors, counts, members)[1]
        color_to_box[members] = b
    index_map = color_to_box[inverse].reshape(image.height, image.width)
    return palette, index_map


def quantization_error(image, palette, index_map):
    """Total squared error of the quantization (test/diagnostic helper)."""
    approx = palette[index_map.ravel()]
    diff = image.pixels.reshape(-1, 3).astype(np.float64) - approx
    return float((diff * diff).sum())


def image_to_histogram_dataset(image, window=5, levels=8):
    """Per-pixel histogram of quantized color indices over a window.

    Every pixel yields one row: the normalized histogram (d = `levels`) of
    palette indices inside the centered window x window neighborhood, with
    borders clamped to the edge so each window always covers window^2 pixels
    and rows sum to exactly 1.  Rows are in row-major pixel order.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd positive integer")
    _, index_map = minimum_variance_quantize(image, levels)
    pad = window // 2
    padded = np.pad(index_map, pad, mode="edge")
    h, w = index_map.shape
    hist = np.empty((h * w, levels))
    for level in range(levels):
        mask = (padded == level).astype(np.float64)
        integral = np.zeros((mask.shape[0] + 1, mask.shape[1] + 1))
        np.cumsum(np.cumsum(mask, axis=0), axis=1, out=integral[1:, 1:])
        counts = (
            integral[window:, window:]
            - integral[:-window, window:]
            - integral[window:, :-window]
            + integral[:-window, :-window]
        )
        hist[:, level] = counts.ravel()
    hist /= float(window * window)
    return hist
