"""
Mode-ODE dynamics for band-limited solutions.

For positive band-limited data the equation

    f_t = H f * f_x - f * (-Delta)^{1/2} f

closes on the Fourier modes |k| <= K:

    dc_m/dt = -m c_0 c_m - sum_{j >= 1} 2 (m + 2j) c_{m+j} conj(c_j),   m >= 0.

Every product couples c_m only to higher modes, so no mode above the
initial band limit is ever excited.  The system is integrated with
classical RK4; the only error in a run is time-stepping error.
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache
import logging

import numpy as np

from . import torus
from .errors import AliasingError, ConfigError, InputError, PositivityFailure, StepUnderflow
from .torus import GridField, SpectralField

log = logging.getLogger(__name__)

DT_MIN = 1e-12
MAX_RETRIES = 5

DEFAULT_TOLERANCES = {
    "energy": 1e-6,
    "conservation_F": 1e-6,
    "monotone": 1e-10,
    "lower_bound": 0.0,
    "slope": 0.05,
    "dissipative": 1e-8,
    "hminus": 1e-3,
    "analyticity": 1e-12,
    "decay_rate": 0.05,
    "w1_exponent": 0.15,
    "closed_form": 1e-7,
    "first_integral": 1e-9,
    "single_mode": 1e-6,
}


# --------------------------------------------------------------------------
# configuration and state

@dataclass
class RunConfig:
    """Everything needed to reproduce one run.

    ``initial`` selects the data: ``{"preset": name, **params}``,
    ``{"coeffs": [...], "coeffs_im": [...]}`` or ``{"grid_file": path}``.
    """

    initial: dict = field(default_factory=lambda: {"preset": "two_mode", "a": 1.0, "b": 0.3})
    K: int = 32
    clip_M: float = 1e3
    fejer_N: int = None
    cfl: float = 1.0
    dt_max: float = 0.05
    t_end: float = 1.0
    record_dt: float = 0.01
    record_times: list = field(default_factory=list)
    snapshot_times: list = field(default_factory=list)
    snapshot_dt: float = None
    tolerances: dict = field(default_factory=dict)
    alpha: float = 0.1
    diag_M: int = None
    band_guard: bool = True

    def __post_init__(self):
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if not 0 < self.cfl <= 2:
            raise ConfigError("cfl must lie in (0, 2]")
        if self.K < 0:
            raise ConfigError("capacity K must be >= 0")
        if self.fejer_N is None:
            self.fejer_N = self.K + 1
        if not 1 <= self.fejer_N <= self.K + 1:
            raise ConfigError("fejer_N must satisfy 1 <= fejer_N <= K + 1")
        if not self.clip_M > 1:
            raise ConfigError("clip_M must exceed 1")
        if not self.record_dt > 0 or not self.dt_max > 0:
            raise ConfigError("record_dt and dt_max must be positive")
        if not 0 < self.alpha < 0.2:
            raise ConfigError("alpha must lie in (0, 1/5)")
        self.tolerances = {**DEFAULT_TOLERANCES, **(self.tolerances or {})}

    def tol(self, name):
        return self.tolerances[name]


@dataclass(frozen=True)
class SimState:
    t: float
    field: SpectralField
    step_count: int = 0
    dt_last: float = 0.0


@dataclass
class Trajectory:
    records: list
    snapshots: list
    config: RunConfig
    termination: str = "completed"
    message: str = ""
    initial: SpectralField = None
    steps: int = 0
    dt_first: float = float("nan")

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def times(self):
        return self.column("t")

    @property
    def completed(self):
        return self.termination == "completed"

    def snapshot_at(self, t):
        for ts, f in self.snapshots:
            if ts == t:
                return f
        raise KeyError(f"no snapshot at t={t}")


# --------------------------------------------------------------------------
# right-hand side

@lru_cache(maxsize=32)
def _coupling(K):
    """Index and weight tables for the quadratic term at capacity K."""
    m = np.arange(K + 1)[:, None]
    j = np.arange(1, K + 1)[None, :]
    valid = m + j <= K
    idx = np.where(valid, m + j, 0)
    weight = np.where(valid, 2.0 * (m + 2 * j), 0.0)
    return idx, weight


def _rhs(c):
    K = c.size - 1
    m = np.arange(K + 1)
    out = -m * c[0].real * c
    if K > 0:
        idx, weight = _coupling(K)
        out -= (weight * c[idx]) @ np.conj(c[1:])
    out[0] = out[0].real
    return out


def galerkin_rhs(f):
    """Time derivative of the coefficients (same capacity and band limit).

    Evaluated over the full capacity: modes above the band limit come out
    exactly zero because they only couple to zero coefficients.
    """
    if not f.mean > 0:
        raise InputError("the mode system needs a positive mean c_0")
    return SpectralField(_rhs(f.coeffs), f.band_limit)


def rhs_grid_oracle(f, M):
    """Pointwise H f * f_x - f * Lambda f on an M-point grid."""
    K = f.band_limit
    if M < 4 * K + 1:
        raise AliasingError(f"grid oracle needs M >= {4 * K + 1}")
    fg = torus.to_grid(f, M).samples
    Hf = torus.to_grid(torus.hilbert(f), M).samples
    fx = torus.to_grid(torus.derivative(f), M).samples
    Lf = torus.to_grid(torus.half_laplacian(f), M).samples
    return GridField(Hf * fx - fg * Lf)


# --------------------------------------------------------------------------
# time stepping

def _check_grid(K):
    return max(4 * K + 1, 16)


def _grid_extremes(c, K):
    g = torus.to_grid(SpectralField(c, K), _check_grid(K)).samples
    return g.min(), g.max()


def step_rk4(s, dt, guard=True, k1=None):
    """One classical RK4 step of the mode system.

    Raises PositivityFailure when the new state is not strictly positive on
    the check grid of size 4K+1.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    f = s.field
    K = f.band_limit
    c = f.coeffs

    def clean(a):
        if guard:
            a = a.copy()
            a[K + 1:] = 0.0
        return a

    k1 = _rhs(c) if k1 is None else k1
    k2 = clean(_rhs(c + 0.5 * dt * k1))
    k3 = clean(_rhs(c + 0.5 * dt * k2))
    k4 = clean(_rhs(c + dt * k3))
    new = clean(c + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))
    new[0] = new[0].real
    if not np.all(np.isfinite(new)):
        raise PositivityFailure(f"non-finite coefficients after step dt={dt:g}")
    lo, _ = _grid_extremes(new, K if guard else new.size - 1)
    if not lo > 0:
        raise PositivityFailure(f"min f = {lo:.3e} <= 0 after step dt={dt:g} at t={s.t:g}")
    return SimState(s.t + dt, SpectralField(new, K if guard else -1), s.step_count + 1, dt)


def adaptive_dt(s, cfl, dt_max, dt_min=DT_MIN):
    """dt = min(dt_max, cfl / (K f_max)); the linear decay rate of mode K is K*fbar."""
    if not 0 < cfl <= 2:
        raise ValueError("cfl must lie in (0, 2]")
    K = s.field.band_limit
    _, fmax = _grid_extremes(s.field.coeffs, K)
    with np.errstate(divide="ignore"):
        dt = min(dt_max, cfl / (K * fmax + 1e-300))
    if dt < dt_min:
        raise StepUnderflow(f"dt={dt:.3e} below floor {dt_min:g} at t={s.t:g}")
    return dt


# --------------------------------------------------------------------------
# initial data

def _preset_coeffs(name, p):
    if name == "constant":
        return [p.get("value", 1.0)]
    if name == "two_mode":
        return [p.get("a", 1.0), p.get("b", 0.3)]
    if name == "cosine":
        # a + amp cos x
        return [p.get("a", 1.0), p.get("amp", 0.6) / 2]
    if name == "single_mode":
        k = int(p.get("k", 3))
        c = np.zeros(k + 1, dtype=complex)
        c[0] = p.get("a", 1.0)
        c[k] = p.get("c", 0.05)
        return c
    if name == "random":
        K = int(p.get("K", 16))
        rng = np.random.default_rng(int(p.get("seed", 0)))
        k = np.arange(1, K + 1)
        c = np.zeros(K + 1, dtype=complex)
        decay = float(p.get("decay", 1.0))
        c[1:] = (rng.standard_normal(K) + 1j * rng.standard_normal(K)) / k ** decay
        # bounded total variation of the modes keeps f >= mean - amp
        c[1:] *= float(p.get("amp", 0.7)) / (2 * np.abs(c[1:]).sum())
        c[0] = p.get("mean", 1.0)
        return c
    return None


def _preset_grid(name, p, M):
    x = torus.grid_nodes(M)
    if name == "cos4":
        return p.get("floor", 0.1) + np.cos(x) ** 4
    if name == "step":
        return np.where(np.abs(x) < p.get("width", np.pi / 2), p.get("high", 1.0), p.get("low", 0.05))
    if name == "spike":
        # narrow bump on a small background: rough data for the clip + Fejer path
        w = p.get("width", 0.05)
        return p.get("low", 0.05) + p.get("height", 20.0) * np.exp(-0.5 * (torus.wrap(x) / w) ** 2)
    return None


PRESETS = ("constant", "two_mode", "cosine", "single_mode", "random", "cos4", "step", "spike")


def preset_field(init, capacity):
    """Spectral preset named in ``init`` at the given capacity (None if grid preset)."""
    params = {k: v for k, v in init.items() if k != "preset"}
    c = _preset_coeffs(init["preset"], params)
    if c is None:
        return None
    c = np.asarray(c, dtype=complex)
    if c.size - 1 > capacity:
        raise ConfigError(f"preset needs capacity >= {c.size - 1}, got K={capacity}")
    return SpectralField.from_coeffs(c, capacity)


def _raw_from_init(init, cfg):
    if "preset" in init:
        name = init["preset"]
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
        f = preset_field(init, cfg.K)
        if f is not None:
            return f
        M = int(init.get("M", max(1024, 4 * cfg.K + 4)))
        return GridField(_preset_grid(name, init, M))
    if "coeffs" in init:
        re = np.asarray(init["coeffs"], dtype=float)
        im = np.asarray(init.get("coeffs_im", np.zeros_like(re)), dtype=float)
        if im.size != re.size:
            raise ConfigError("coeffs and coeffs_im must have equal length")
        if re.size - 1 > cfg.K:
            raise ConfigError("coefficient list exceeds the capacity K")
        return SpectralField.from_coeffs(re + 1j * im, cfg.K)
    if "grid_file" in init:
        from .io import read_grid_csv
        return read_grid_csv(init["grid_file"])
    raise ConfigError("initial data needs one of: preset, coeffs, grid_file")


def prepare_initial(raw, cfg):
    """Turn raw data into a positive band-limited field of capacity cfg.K.

    Spectral data (presets, coefficient lists) is used as given.  Grid data
    is clipped into [1/clip_M, clip_M], analysed and smoothed with the
    order-``fejer_N`` Fejer kernel, which keeps it inside the clip interval.
    """
    if raw is None:
        raw = cfg.initial
    if isinstance(raw, dict):
        raw = _raw_from_init(raw, cfg)
    if isinstance(raw, SpectralField):
        f = raw.with_capacity(cfg.K) if raw.capacity != cfg.K else raw
        lo = torus.to_grid(f, max(8 * f.band_limit + 8, 64)).samples.min()
        if not lo > 0:
            raise InputError(f"spectral initial data is not positive (min {lo:.3e})")
        return f
    samples = raw.samples if isinstance(raw, GridField) else np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(samples)):
        raise InputError("initial grid samples must be finite")
    clipped = np.clip(samples, 1.0 / cfg.clip_M, cfg.clip_M)
    Ka = min(cfg.K, (clipped.size - 1) // 2)
    f = torus.fejer(torus.analyze(clipped, Ka, cfg.K), cfg.fejer_N)
    return f


# --------------------------------------------------------------------------
# driver

# cubic Hermite interpolation at 3-point Gauss-Legendre nodes on [0, 1]
_GAUSS_X = 0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_GAUSS_W = np.array([5.0, 8.0, 5.0]) / 18.0


def _hermite(c0, d0, c1, d1, h, s):
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * c0 + h10 * h * d0 + h01 * c1 + h11 * h * d1


def _targets(cfg):
    n = int(np.floor(cfg.t_end / cfg.record_dt + 1e-9))
    rec = {round(i * cfg.record_dt, 15) for i in range(n + 1)}
    rec.add(cfg.t_end)
    rec.update(t for t in cfg.record_times if 0 <= t <= cfg.t_end)
    snap = {t for t in cfg.snapshot_times if 0 <= t <= cfg.t_end}
    if cfg.snapshot_dt:
        m = int(np.floor(cfg.t_end / cfg.snapshot_dt + 1e-9))
        snap.update(round(i * cfg.snapshot_dt, 15) for i in range(m + 1))
    return sorted(rec), sorted(snap)


def simulate(cfg, initial=None):
    """Integrate to cfg.t_end, recording diagnostics and snapshots.

    Steps are shortened to land exactly on every record and snapshot time.
    Time integrals needed by the diagnostics (dissipation, entropy
    production, ...) are accumulated over each accepted step with a
    3-point Gauss rule on the cubic Hermite interpolant of the state, so
    they are independent of the RK stages and fourth-order accurate.
    A positivity failure or step underflow ends the run early; the partial
    trajectory is returned with ``termination`` set accordingly.
    """
    from . import diagnostics as dg

    f0 = prepare_initial(initial, cfg)
    ctx = dg.DiagContext.from_initial(f0, M=cfg.diag_M, alpha=cfg.alpha)
    rec_times, snap_times = _targets(cfg)
    rec_set, snap_set = set(rec_times), set(snap_times)
    targets = sorted(rec_set | snap_set)

    state = SimState(0.0, f0)
    integrals = np.zeros(len(dg.INTEGRANDS))
    records = [dg.record(state, ctx, integrals)]
    snapshots = [(0.0, f0)] if 0.0 in snap_set else []
    traj = Trajectory(records, snapshots, cfg, initial=f0)

    deriv = _rhs(state.field.coeffs)
    ti = 1
    while ti < len(targets):
        target = targets[ti]
        try:
            dt = adaptive_dt(state, cfg.cfl, cfg.dt_max)
        except StepUnderflow as exc:
            traj.termination, traj.message = "step_underflow", str(exc)
            log.warning("run stopped: %s", exc)
            return traj
        if traj.steps == 0:
            traj.dt_first = dt
        land = state.t + dt >= target - 1e-12 * max(1.0, target)
        if land:
            dt = target - state.t
        for attempt in range(MAX_RETRIES + 1):
            try:
                new = step_rk4(state, dt, guard=cfg.band_guard, k1=deriv)
                break
            except PositivityFailure as exc:
                if attempt == MAX_RETRIES:
                    traj.termination, traj.message = "positivity_failure", str(exc)
                    log.warning("run stopped: %s", exc)
                    return traj
                dt *= 0.5
                land = False
        if dt < DT_MIN:
            traj.termination = "step_underflow"
            return traj
        if land:
            new = replace(new, t=target)
        new_deriv = _rhs(new.field.coeffs)
        h = new.t - state.t
        K = state.field.band_limit
        for s, w in zip(_GAUSS_X, _GAUSS_W):
            c = _hermite(state.field.coeffs, deriv, new.field.coeffs, new_deriv, h, s)
            c[K + 1:] = 0.0 if cfg.band_guard else c[K + 1:]
            c[0] = c[0].real
            integrals += h * w * dg.integrands(SpectralField(c, K if cfg.band_guard else -1), ctx)
        state, deriv = new, new_deriv
        traj.steps += 1
        if land:
            if target in rec_set:
                records.append(dg.record(state, ctx, integrals))
            if target in snap_set:
                snapshots.append((target, state.field))
            ti += 1
    return traj
