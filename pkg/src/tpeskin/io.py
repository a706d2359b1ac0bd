"""
File formats for runs.

Every table is CSV with a header row and floats written with 17
significant digits, so values round-trip exactly and files diff cleanly.

records.csv          one DiagRecord per row, header ``DiagRecord.header()``
snapshots.csv        index: ``t,band_limit,file``
snapshot_NNNN.csv    coefficients of one field: ``k,re,im`` for k = 0..K
initial.csv          the prepared initial field, same layout as a snapshot
grid CSV             ``x,f`` samples on the uniform grid (initial-data input)
string CSV           ``s,X`` with a leading ``# period=...`` line
flow CSV             ``t,i,x``: position of seed i at time t
checks.csv           ``name,status,worst,t_worst,tol,note``
manifest.json        config echo, version, wall times, termination, sha256 per file
config.toml          fully resolved flat config (see ``tpeskin.config``)
"""
import csv
import hashlib
import json
import math
import os
import time

import numpy as np

from . import __version__
from . import config as cfgmod
from .diagnostics import CheckReport, DiagRecord
from .dynamics import Trajectory
from .errors import ChecksumError, ConfigError, InputError
from .lagrangian import FlowMap, StringConfig
from .torus import GridField, SpectralField

MANIFEST = "manifest.json"


def fmt(v):
    return format(float(v), ".17g")


def _write_rows(path, header, rows, preamble=()):
    with open(path, "w", newline="") as fh:
        for line in preamble:
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_table(path, header):
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
    except FileNotFoundError:
        raise InputError(f"missing file {path}") from None
    rows = list(csv.reader(lines))
    if not rows or rows[0] != list(header):
        raise InputError(f"{path}: expected header {','.join(header)}")
    return rows[1:]


# --------------------------------------------------------------------------
# fields

def write_grid_csv(path, g):
    _write_rows(path, ["x", "f"], ([fmt(x), fmt(v)] for x, v in zip(g.x, g.samples)))


def read_grid_csv(path):
    """Uniform-grid samples from an ``x,f`` CSV; x must be the standard nodes."""
    rows = _read_table(path, ["x", "f"])
    try:
        data = np.array(rows, dtype=float).reshape(-1, 2)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(data)):
        raise InputError(f"{path}: samples must be finite")
    if data.shape[0] < 2:
        raise InputError(f"{path}: need at least 2 samples")
    g = GridField(data[:, 1])
    if not np.allclose(data[:, 0], g.x, atol=1e-9):
        raise InputError(f"{path}: x column must be the uniform nodes -pi + 2 pi j / M")
    return g


def write_field_csv(path, f):
    rows = ([str(k), fmt(c.real), fmt(c.imag)] for k, c in enumerate(f.coeffs))
    _write_rows(path, ["k", "re", "im"], rows)


def read_field_csv(path, band_limit=-1):
    rows = _read_table(path, ["k", "re", "im"])
    c = np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
    return SpectralField.from_coeffs(c, c.size - 1, band_limit=band_limit)


# --------------------------------------------------------------------------
# records and snapshots

def write_records_csv(path, records):
    _write_rows(path, DiagRecord.header(), ([fmt(v) for v in r.values()] for r in records))


def read_records_csv(path):
    rows = _read_table(path, DiagRecord.header())
    return [DiagRecord(*(float(v) for v in r)) for r in rows]


def write_snapshots(directory, snapshots):
    """Write snapshot_NNNN.csv files plus the snapshots.csv index; return file names."""
    names = []
    index = []
    for i, (t, f) in enumerate(snapshots):
        name = f"snapshot_{i:04d}.csv"
        write_field_csv(os.path.join(directory, name), f)
        names.append(name)
        index.append([fmt(t), str(f.band_limit), name])
    _write_rows(os.path.join(directory, "snapshots.csv"), ["t", "band_limit", "file"], index)
    return ["snapshots.csv"] + names


def read_snapshots(directory):
    rows = _read_table(os.path.join(directory, "snapshots.csv"), ["t", "band_limit", "file"])
    return [(float(t), read_field_csv(os.path.join(directory, name), int(bl))) for t, bl, name in rows]


# --------------------------------------------------------------------------
# strings and flows

def write_string_csv(path, X):
    _write_rows(path, ["s", "X"], ([fmt(a), fmt(b)] for a, b in zip(X.s, X.X)),
                preamble=[f"# period={fmt(X.period)}"])


def read_string_csv(path):
    period = 2 * math.pi
    try:
        with open(path) as fh:
            first = fh.readline()
    except FileNotFoundError:
        raise InputError(f"missing file {path}") from None
    if first.startswith("# period="):
        period = float(first.split("=", 1)[1])
    data = np.array(_read_table(path, ["s", "X"]), dtype=float).reshape(-1, 2)
    return StringConfig(data[:, 0], data[:, 1], period)


def write_flow_csv(path, flow):
    rows = ([fmt(t), str(i), fmt(x)]
            for t, pos in zip(flow.times, flow.positions) for i, x in enumerate(pos))
    _write_rows(path, ["t", "i", "x"], rows)


def read_flow_csv(path):
    data = np.array(_read_table(path, ["t", "i", "x"]), dtype=float).reshape(-1, 3)
    times = np.unique(data[:, 0])
    n = int(data[:, 1].max()) + 1
    pos = data[:, 2].reshape(times.size, n)
    return FlowMap(pos[0].copy(), times, pos)


# --------------------------------------------------------------------------
# checks

CHECK_HEADER = ["name", "status", "worst", "t_worst", "tol", "note"]


def write_checks_csv(path, reports):
    rows = ([r.name, r.status, fmt(r.worst), fmt(r.t_worst), fmt(r.tol), r.note] for r in reports)
    _write_rows(path, CHECK_HEADER, rows)


def read_checks_csv(path):
    return [CheckReport(n, s, float(w), float(t), float(tol), note)
            for n, s, w, t, tol, note in _read_table(path, CHECK_HEADER)]


def checks_summary(reports):
    n_fail = sum(not r.passed for r in reports)
    n_skip = sum(r.status == "skipped" for r in reports)
    lines = [r.line() for r in reports]
    lines.append(f"{len(reports)} checks: {len(reports) - n_fail - n_skip} passed, "
                 f"{n_fail} failed, {n_skip} skipped")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# manifest

def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(directory, flat_config, files, termination, started, extra=None, overrides=()):
    """Write manifest.json listing ``files`` (names relative to ``directory``)."""
    manifest = {
        "version": __version__,
        "config": flat_config,
        "overrides": list(overrides),
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "termination": termination,
        "files": {name: sha256(os.path.join(directory, name)) for name in sorted(files)},
    }
    manifest.update(extra or {})
    with open(os.path.join(directory, MANIFEST), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return manifest


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"not JSON serializable: {v!r}")


def read_manifest(directory, verify=True):
    path = os.path.join(directory, MANIFEST)
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise ChecksumError(f"no manifest in {directory}") from None
    if verify:
        for name, digest in manifest["files"].items():
            p = os.path.join(directory, name)
            if not os.path.exists(p):
                raise ChecksumError(f"{name} listed in the manifest is missing")
            if sha256(p) != digest:
                raise ChecksumError(f"{name} does not match its manifest checksum")
    return manifest


def load_trajectory(directory):
    """Rebuild a Trajectory from a verified run directory."""
    manifest = read_manifest(directory)
    flat = manifest["config"]
    try:
        cfg = cfgmod.run_config(flat)
    except ConfigError as exc:
        raise ConfigError(f"{directory}: {exc}") from None
    records = read_records_csv(os.path.join(directory, "records.csv"))
    snapshots = read_snapshots(directory) if "snapshots.csv" in manifest["files"] else []
    initial = read_field_csv(os.path.join(directory, "initial.csv"), manifest.get("initial_band_limit", -1))
    return Trajectory(records, snapshots, cfg, manifest["termination"], manifest.get("message", ""),
                      initial, manifest.get("steps", 0), manifest.get("dt_first", float("nan")))


# --------------------------------------------------------------------------
# plots

def render_svg(series, path, title="", logx=False, logy=False, width=640, height=400):
    """Write a self-contained SVG line plot.

    Parameters
    ----------
    series : dict
        ``name -> (t, values)``; every series needs at least 2 finite points
        (and positive ones on log axes).
    """
    if not series:
        raise ValueError("render_svg needs at least one series")
    data = {}
    for name, (t, v) in series.items():
        t, v = np.asarray(t, dtype=float), np.asarray(v, dtype=float)
        ok = np.isfinite(t) & np.isfinite(v)
        ok &= (t > 0) if logx else True
        ok &= (v > 0) if logy else True
        if ok.sum() < 2:
            raise ValueError(f"series {name!r} has fewer than 2 plottable points")
        data[name] = (np.log10(t[ok]) if logx else t[ok], np.log10(v[ok]) if logy else v[ok])

    xs = np.concatenate([d[0] for d in data.values()])
    ys = np.concatenate([d[1] for d in data.values()])
    x0, x1 = xs.min(), xs.max()
    y0, y1 = ys.min(), ys.max()
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        pad = 0.5 if y0 == 0 else 0.05 * abs(y0)
        y0, y1 = y0 - pad, y1 + pad
    left, right, top, bottom = 70, 20, 30, 40
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="18" text-anchor="middle">{_esc(title)}</text>')
    for frac in (0.0, 0.5, 1.0):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        xl = f"1e{xv:.2g}" if logx else f"{xv:.4g}"
        yl = f"1e{yv:.2g}" if logy else f"{yv:.4g}"
        out.append(f'<text x="{px(xv):.1f}" y="{height - bottom + 15}" text-anchor="middle">{xl}</text>')
        out.append(f'<text x="{left - 5}" y="{py(yv) + 4:.1f}" text-anchor="end">{yl}</text>')
    for i, (name, (t, v)) in enumerate(data.items()):
        color = colors[i % len(colors)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(t, v))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{left + 8}" y="{top + 14 + 13 * i}" fill="{color}">{_esc(name)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
    return path


def _esc(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
