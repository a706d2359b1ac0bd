"""
Flat dotted-key run configuration.

Config files are TOML; nested tables and dotted keys are equivalent, so

    [dynamics]
    K = 32

and ``dynamics.K = 32`` mean the same.  Every key is listed in ``KEYS``
with its default; unknown keys are rejected.  ``--set key=value``
overrides use TOML value syntax (``0.25``, ``true``, ``[0.1, 0.2]``);
anything that does not parse as TOML is taken as a bare string.

Sections
--------
initial.*      initial data: ``preset`` plus preset parameters, ``coeffs``
               (and ``coeffs_im``) or ``grid_file``
dynamics.*     K, cfl, dt_max, t_end, clip_M, fejer_N, band_guard
output.*       record_dt, record_times, snapshot_dt, snapshot_times, svg
diagnostics.*  alpha (Hoelder exponent), M (diagnostic grid size)
tol.*          slack for each check (see ``dynamics.DEFAULT_TOLERANCES``)
checks.*       upper_C (L-infinity smoothing constant), theta (analyticity radius),
               only (list of check names; empty runs all)
lagrangian.*   particles, dt, interp, string_file, tol, flow_times (rows of flow.csv)
oracle.*       K, M, samples, seed
sweep.*        lists of values for other keys; the sweep runs their product
"""
import math

import tomli

from .dynamics import DEFAULT_TOLERANCES, RunConfig
from .errors import ConfigError

KEYS = {
    "initial.preset": "two_mode",
    "dynamics.K": 32,
    "dynamics.cfl": 1.0,
    "dynamics.dt_max": 0.05,
    "dynamics.t_end": 1.0,
    "dynamics.clip_M": 1000.0,
    "dynamics.fejer_N": None,
    "dynamics.band_guard": True,
    "output.record_dt": 0.01,
    "output.record_times": [],
    "output.snapshot_dt": None,
    "output.snapshot_times": [],
    "output.svg": False,
    "diagnostics.alpha": 0.1,
    "diagnostics.M": None,
    "checks.upper_C": None,
    "checks.theta": None,
    "checks.only": [],
    "lagrangian.particles": 2048,
    "lagrangian.dt": 0.01,
    "lagrangian.interp": "hermite",
    "lagrangian.string_file": None,
    "lagrangian.tol": 1e-3,
    "lagrangian.flow_times": 21,
    "oracle.K": 32,
    "oracle.M": 8192,
    "oracle.samples": 20,
    "oracle.seed": 0,
}
KEYS.update({f"tol.{k}": v for k, v in DEFAULT_TOLERANCES.items()})

# initial.* accepts any preset parameter
OPEN_SECTIONS = ("initial.", "sweep.")


def flatten(tree, prefix=""):
    out = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def parse_value(text):
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def validate_keys(flat):
    for key in flat:
        if key not in KEYS and not key.startswith(OPEN_SECTIONS):
            raise ConfigError(f"unknown config key {key!r}")


def load(path=None, overrides=()):
    """Read a config file (optional) and apply ``key=value`` overrides."""
    flat = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                flat = flatten(tomli.load(fh))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override {item!r} is not of the form key=value")
        flat[key.strip()] = parse_value(value.strip())
    validate_keys(flat)
    return flat


def resolved(flat):
    """Defaults merged with the given keys.

    The default preset applies unless the keys name other initial data
    (``initial.coeffs`` or ``initial.grid_file``).
    """
    out = {k: v for k, v in KEYS.items() if not k.startswith("initial.")}
    if not any(k in flat for k in ("initial.preset", "initial.coeffs", "initial.grid_file")):
        out["initial.preset"] = KEYS["initial.preset"]
    out.update(flat)
    return out


def run_config(flat):
    """RunConfig from a flat mapping (defaults filled in)."""
    r = resolved(flat)
    initial = {k[len("initial."):]: v for k, v in r.items() if k.startswith("initial.")}
    tolerances = {k[len("tol."):]: v for k, v in r.items() if k.startswith("tol.")}
    try:
        return RunConfig(
            initial=initial,
            K=int(r["dynamics.K"]),
            clip_M=float(r["dynamics.clip_M"]),
            fejer_N=None if r["dynamics.fejer_N"] is None else int(r["dynamics.fejer_N"]),
            cfl=float(r["dynamics.cfl"]),
            dt_max=float(r["dynamics.dt_max"]),
            t_end=float(r["dynamics.t_end"]),
            record_dt=float(r["output.record_dt"]),
            record_times=[float(t) for t in r["output.record_times"]],
            snapshot_times=[float(t) for t in r["output.snapshot_times"]],
            snapshot_dt=None if r["output.snapshot_dt"] is None else float(r["output.snapshot_dt"]),
            tolerances={k: float(v) for k, v in tolerances.items()},
            alpha=float(r["diagnostics.alpha"]),
            diag_M=None if r["diagnostics.M"] is None else int(r["diagnostics.M"]),
            band_guard=bool(r["dynamics.band_guard"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config value: {exc}") from None


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\b": "\\b", "\t": "\\t", "\n": "\\n", "\f": "\\f", "\r": "\\r"}


def _toml_string(v):
    out = []
    for ch in v:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        return _toml_string(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize {v!r}")


def dumps(flat):
    """Flat dotted-key TOML text; keys with value None are omitted."""
    lines = [f"{k} = {_toml_value(v)}" for k, v in sorted(flat.items()) if v is not None]
    return "\n".join(lines) + "\n"
