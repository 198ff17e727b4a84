"""File formats: portable graymaps for scenes/renders, CSV for everything else.

CSV files are UTF-8 with a header row and full-precision floats (shortest
round-trip repr), so identical data always produces byte-identical files.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .errors import ConfigurationError


def _fmt(x: float) -> str:
    return repr(float(x))


def write_complex_csv(path, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=complex)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re", "im"])
        for v in values:
            writer.writerow([_fmt(v.real), _fmt(v.imag)])


def read_complex_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["re", "im"]:
            raise ConfigurationError(f"{path}: expected a CSV with header 're,im'")
        values = [complex(float(row[0]), float(row[1])) for row in reader if row]
    return np.asarray(values, dtype=complex)


def write_angles_csv(path, angles: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["angle_rad"])
        for a in np.asarray(angles, dtype=float):
            writer.writerow([_fmt(a)])


def read_angles_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip() != "angle_rad":
            raise ConfigurationError(f"{path}: expected a CSV with header 'angle_rad'")
        return np.asarray([float(row[0]) for row in reader if row], dtype=float)


def write_trace_csv(path, trace) -> None:
    """Outer-iteration trace as (n, cost, rel_change) rows.

    Wall times stay out of the file so reruns with equal seeds are
    byte-identical; they are reported in the text report instead.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "cost", "rel_change"])
        for row in trace.rows:
            writer.writerow([row.n, _fmt(row.cost), _fmt(row.rel_change)])


def write_inner_trace_csv(path, rows) -> None:
    """Inner-loop trace rows (k, value, rel_change) or (k, value)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if rows and len(rows[0]) == 3:
            writer.writerow(["k", "cost", "rel_change"])
        else:
            writer.writerow(["k", "rel_residual"])
        for row in rows:
            writer.writerow([row[0]] + [_fmt(v) for v in row[1:]])


def write_report_csv(path, reports: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "mse", "mse_raw", "entropy", "final_cost", "iterations"])
        for method, rep in reports.items():
            writer.writerow(
                [method, _fmt(rep.mse), _fmt(rep.mse_raw), _fmt(rep.entropy),
                 _fmt(rep.final_cost), rep.iterations]
            )


def write_pgm(path, image2d: np.ndarray, contrast: str = "linear") -> None:
    """8-bit binary graymap of a magnitude image.

    ``linear`` scales [0, max] to [0, 255]; ``stretch`` clips at the 1st and
    99th intensity percentiles first (useful for low-contrast scenes).
    """
    img = np.abs(np.asarray(image2d, dtype=complex)).astype(float)
    if img.ndim != 2:
        raise ConfigurationError("write_pgm needs a 2D image")
    if contrast == "stretch":
        lo, hi = np.percentile(img, [1.0, 99.0])
        if hi > lo:
            img = np.clip((img - lo) / (hi - lo), 0.0, 1.0)
        elif img.max() > 0.0:
            img = img / img.max()
    elif contrast == "linear":
        if img.max() > 0.0:
            img = img / img.max()
    else:
        raise ConfigurationError(f"unknown contrast mode {contrast!r}")
    data = np.round(img * 255.0).astype(np.uint8)
    height, width = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read an 8- or 16-bit portable graymap (P2 or P5) to floats in [0, 1]."""
    raw = Path(path).read_bytes()
    if raw[:2] not in (b"P2", b"P5"):
        raise ConfigurationError(f"{path}: not a portable graymap (P2/P5)")
    magic = raw[:2].decode("ascii")
    # header tokens: magic, width, height, maxval; comments run '#' to EOL
    tokens = []
    pos = 2
    while len(tokens) < 3:
        match = re.match(rb"\s*(#[^\n]*\n|\S+)", raw[pos:])
        if match is None:
            raise ConfigurationError(f"{path}: truncated graymap header")
        token = match.group(1)
        pos += match.end()
        if not token.startswith(b"#"):
            tokens.append(token)
    width, height, maxval = (int(t) for t in tokens)
    if maxval <= 0 or maxval > 65535:
        raise ConfigurationError(f"{path}: unsupported maxval {maxval}")
    if magic == "P2":
        values = np.array(raw[pos:].split(), dtype=float)
    else:
        pos += 1  # single whitespace after maxval
        if maxval < 256:
            values = np.frombuffer(raw[pos:], dtype=np.uint8, count=width * height).astype(float)
        else:
            values = np.frombuffer(raw[pos:], dtype=">u2", count=width * height).astype(float)
    if values.size != width * height:
        raise ConfigurationError(f"{path}: expected {width * height} samples, got {values.size}")
    return values.reshape(height, width) / float(maxval)


def read_scene(path, size: int | None = None) -> tuple[np.ndarray, tuple[int, int]]:
    """Load a scene file: graymap (magnitudes, zero phase) or complex CSV.

    Returns the column-major flattened complex vector and the (rows, cols)
    shape. CSV scenes are assumed square; ``size`` overrides the inferred side
    length.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        values = read_complex_csv(path)
        side = size if size is not None else int(round(np.sqrt(len(values))))
        if side * side != len(values):
            raise ConfigurationError(
                f"{path}: {len(values)} values do not form a {side}x{side} scene"
            )
        return values, (side, side)
    image = read_pgm(path)
    rows, cols = image.shape
    return image.flatten(order="F").astype(complex), (rows, cols)
