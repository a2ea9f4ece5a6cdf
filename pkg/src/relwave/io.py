"""Atomic artifact writers and the field CSV format."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import ComplexField, SpectralGrid

FLOAT_FMT = "%.17g"


def atomic_write_text(path, text: str) -> Path:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in np.atleast_2d(np.asarray(rows, dtype=float)):
        w.writerow([FLOAT_FMT % v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def write_field_csv(path, field: ComplexField) -> Path:
    """Field samples as ``x[,y,z],re,im`` (physical) or ``kx[,ky,kz],re,im`` (spectral)."""
    g = field.grid
    axes = "xyz"[: g.dim]
    if field.representation == "spectral":
        coords, names = g.k, [f"k{a}" for a in axes]
    else:
        coords, names = g.x, list(axes)
    vals = field.values.ravel()
    rows = np.column_stack([c.ravel() for c in coords] + [vals.real, vals.imag])
    return write_csv(path, names + ["re", "im"], rows)


def read_field_csv(path) -> ComplexField:
    """Read a 1-D ``x,re,im`` CSV on a uniform grid starting at ``-box/2``."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    except FileNotFoundError:
        raise ConfigError(f"{path}: file not found") from None
    except (StopIteration, ValueError) as exc:
        raise ConfigError(f"{path}: malformed field CSV ({exc})") from None
    if header != ["x", "re", "im"]:
        raise ConfigError(f"{path}: header must be x,re,im, got {','.join(header)}")
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 3:
        raise ConfigError(f"{path}: need at least two rows of three numbers")
    x = data[:, 0]
    n = len(x)
    h = (x[-1] - x[0]) / (n - 1)
    box = n * h
    if h <= 0 or not np.allclose(np.diff(x), h, rtol=1e-9, atol=1e-12 * box):
        raise ConfigError(f"{path}: x column must be uniformly increasing")
    if not np.isclose(x[0], -box / 2, rtol=1e-9, atol=1e-12 * box):
        raise ConfigError(f"{path}: grid must start at -box/2 = {-box / 2}, got {x[0]}")
    grid = SpectralGrid(1, n, float(box))
    return ComplexField(grid, data[:, 1] + 1j * data[:, 2])
