"""Byte-stable CSV tables and P6 kymograph images.

Floats are written with ``repr`` (shortest round-trip form), missing values
as empty fields, lines end with LF and there are no timestamps, so identical
inputs give identical files.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

DISPERSION_COLUMNS = ("sigma_candidate", "g1", "g2", "H", "G")
G_CURVE_COLUMNS = ("sigma", "G")
PROFILE_COLUMNS = ("z", "rho1", "rho2", "S")
SNAPSHOT_COLUMNS = ("t", "x", "rho1", "rho2", "S", "N")
TRACK_COLUMNS = ("t", "species", "x_peak", "peak_height")
BIFURCATION_COLUMNS = ("phi_red", "speed_slow", "speed_fast", "regime", "sigma_analytic", "phi_star")


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, str):
        if any(c in v for c in ',"\n\r'):
            raise ValueError(f"field {v!r} would need quoting")
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if math.isnan(f):
        return ""
    return repr(f)


def csv_text(columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, header has {len(columns)}")
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(csv_text(columns, rows))
    return path


def parse_value(text):
    if text == "":
        return None
    try:
        if text.lstrip("+-").isdigit():
            return int(text)
        return float(text)
    except ValueError:
        return text


def read_csv(path):
    """Header and rows, numbers parsed back to ``int``/``float``, empty fields to None."""
    with open(path, newline="", encoding="ascii") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = tuple(lines[0].split(","))
    rows = [tuple(parse_value(f) for f in line.split(",")) for line in lines[1:]]
    return header, rows


# -- table builders ------------------------------------------------------------

def snapshot_rows(snapshots, grid):
    x = grid.x
    for s in snapshots:
        for k in range(grid.nx):
            yield (s.t, x[k], s.rho1[k], s.rho2[k], s.S[k], s.N[k])


def track_rows(record):
    for i in record.species:
        tr = record.track(i)
        for t, xp, h in zip(tr.t, tr.x_peak, tr.height):
            yield (t, i, xp, h)


def bifurcation_rows(result):
    for r in result.rows:
        yield (r.phi_red, r.speed_slow, r.speed_fast, r.regime, r.sigma_analytic, result.phi_star)


# -- kymograph image -----------------------------------------------------------

def kymograph_pixels(kymo):
    """``uint8`` array ``(rows, cols, 3)`` with R = species 2 and G = species 1."""
    img = np.zeros(kymo.g.shape + (3,), dtype=np.uint8)
    img[..., 0] = np.rint(np.clip(kymo.r, 0.0, 1.0) * 255).astype(np.uint8)
    img[..., 1] = np.rint(np.clip(kymo.g, 0.0, 1.0) * 255).astype(np.uint8)
    return img


def ppm_bytes(kymo):
    img = kymograph_pixels(kymo)
    h, w = img.shape[:2]
    return f"P6\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def write_ppm(path, kymo):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(ppm_bytes(kymo))
    return path


def read_ppm(path):
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6" or len(parts) < 5:
        raise ValueError(f"{path}: not a binary P6 pixmap")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    body = data[len(data) - 3 * w * h:]
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
