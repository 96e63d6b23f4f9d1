"""File writers: CSV tables, binary grids and PPM heatmaps.

CSV floats use ``repr``-exact 17 significant digits with ``.`` as decimal
separator regardless of locale.

Binary grid layout (``.bgrid``)::

    b"BGRID 1 <nrows> <ncols> <d0> <d1> <t>\\n"   ASCII header, floats in %.17g
    nrows * ncols little-endian float64, row-major

PPM heatmaps are binary P6 files: ``b"P6\\n<width> <height>\\n255\\n"``
followed by ``width * height`` RGB byte triples, rows top to bottom.
Values map linearly from white (minimum) to dark red (maximum).
"""
from __future__ import annotations

import hashlib
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path, header: Sequence[str], columns: Iterable) -> Path:
    path = Path(path)
    cols = [np.atleast_1d(np.asarray(c)) for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(str(int(c[i])) if np.issubdtype(c.dtype, np.integer) else fmt(c[i])
                              for c in cols))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def read_csv(path):
    """Return ``(header, array)`` for a numeric CSV written by :func:`write_csv`."""
    path = Path(path)
    with path.open(encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_curve(path, curve) -> Path:
    pts = curve.points
    names = ["q1", "x", "y"] + (["z"] if pts.shape[1] == 3 else [])
    return write_csv(path, names, [curve.arc_q1] + [pts[:, i] for i in range(pts.shape[1])])


def write_intersections(path, crossings) -> Path:
    """One line per crossing: ``q1_a q1_b x y [z] degenerate``."""
    lines = [f"# crossings: {len(crossings)}", "# q1_a q1_b x y [z] degenerate"]
    for c in crossings:
        coords = " ".join(fmt(v) for v in c.point)
        lines.append(f"{fmt(c.q1_a)} {fmt(c.q1_b)} {coords} {int(c.degenerate)}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def write_potential(path, v) -> Path:
    return write_csv(path, ["q1", "v"], [v.q1, v.v])


def write_susy_pair(path, q1, pair) -> Path:
    return write_csv(path, ["q1", "v_minus", "v_plus", "kappa_minus_sq", "kappa_plus_sq"],
                     [q1, pair.v_minus, pair.v_plus, pair.kappa_minus_sq, pair.kappa_plus_sq])


def write_scattering(path, result, analytic=None) -> Path:
    header = ["k", "Re_R", "Im_R", "Re_T", "Im_T", "abs_T_sq", "unitarity_residual"]
    cols = [result.k, result.R.real, result.R.imag, result.T.real, result.T.imag,
            result.flux_transmission, np.full(len(result.k), result.unitarity_residual)]
    if analytic is not None:
        header.append("abs_T_sq_analytic")
        cols.append(analytic)
    return write_csv(path, header, cols)


def write_spectrum(path, spectrum, wavefunctions_path=None) -> Path:
    out = write_csv(path, ["index", "energy"], [np.arange(spectrum.count), spectrum.energies])
    if wavefunctions_path is not None:
        write_csv(wavefunctions_path, ["q1"] + [f"psi_{i}" for i in range(spectrum.count)],
                  [spectrum.q1] + [spectrum.wavefunctions[:, i] for i in range(spectrum.count)])
    return out


def write_grid(path, data, d0, d1, t=0.0) -> Path:
    data = np.ascontiguousarray(np.asarray(data, dtype="<f8"))
    if data.ndim != 2:
        raise ValueError("grid must be 2D")
    path = Path(path)
    header = f"BGRID 1 {data.shape[0]} {data.shape[1]} {fmt(d0)} {fmt(d1)} {fmt(t)}\n"
    with path.open("wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(data.tobytes(order="C"))
    return path


def read_grid(path):
    """Return ``(data, d0, d1, t)``."""
    raw = Path(path).read_bytes()
    end = raw.index(b"\n")
    parts = raw[:end].decode("ascii").split()
    if parts[:2] != ["BGRID", "1"]:
        raise ValueError("not a BGRID v1 file")
    nr, nc = int(parts[2]), int(parts[3])
    data = np.frombuffer(raw[end + 1:], dtype="<f8")
    if data.size != nr * nc:
        raise ValueError("truncated grid")
    return data.reshape(nr, nc), float(parts[4]), float(parts[5]), float(parts[6])


def colormap(values, vmin=None, vmax=None):
    """White-to-dark-red RGB bytes for an array of values."""
    v = np.asarray(values, dtype=float)
    lo = np.nanmin(v) if vmin is None else vmin
    hi = np.nanmax(v) if vmax is None else vmax
    s = np.zeros_like(v) if hi <= lo else np.clip((v - lo) / (hi - lo), 0.0, 1.0)
    r = 255.0 - 95.0 * s
    g = 255.0 * (1.0 - s)
    b = 255.0 * (1.0 - s)
    return np.stack([r, g, b], axis=-1).round().astype(np.uint8)


def write_ppm(path, values, vmin=None, vmax=None) -> Path:
    """Heatmap of a 2D array; row 0 is the top image row."""
    rgb = colormap(values, vmin, vmax)
    if rgb.ndim != 3:
        raise ValueError("heatmap needs a 2D array")
    h, w, _ = rgb.shape
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())
    return path


def read_ppm(path):
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def ensure_dir(path) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    return path
