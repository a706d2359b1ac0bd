"""
Lagrangian picture: the elastic string X(s, t) behind a stretch field f.

The label density F = 1/f obeys F_t + (F u)_x = 0 with u = -Hf, so F(., t)
is the pushforward of F_0 under the particle flow dPsi/dt = -Hf(Psi, t), and
the string is X(s, t) = Psi_t(X_0(s)).  Its local stretch is the field
itself: X'(s, t) = f(X(s, t), t).

Labels need not have period 2*pi.  A configuration with X(s + P) = X(s) + 2*pi
corresponds to a field with int 1/f = P; the usual normalization P = 2*pi
is the case f_inf = 1.  ``StringConfig.period`` stores P.
"""
from dataclasses import dataclass

import numpy as np

from . import torus
from .diagnostics import _report, lower_bound_fmin
from .dynamics import _hermite, _rhs
from .errors import ConfigError, FlowCrossingError
from .torus import TWO_PI, GridField, SpectralField


@dataclass(frozen=True)
class StringConfig:
    """Labels ``s`` (uniform, one period) and positions ``X``.

    X(s + period) = X(s) + 2 pi is implied; the wrap point is not stored.
    """

    s: np.ndarray
    X: np.ndarray
    period: float = TWO_PI

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if s.shape != X.shape or s.ndim != 1 or s.size < 2:
            raise ConfigError("labels and positions must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(s) <= 0) or s[-1] >= s[0] + self.period:
            raise ConfigError("labels must be strictly increasing within one period")
        if np.any(np.diff(X) <= 0) or X[-1] >= X[0] + TWO_PI:
            raise ConfigError("positions must be strictly increasing within one period")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "X", X)

    def closed(self):
        """Labels and positions with the wrap point appended."""
        return np.append(self.s, self.s[0] + self.period), np.append(self.X, self.X[0] + TWO_PI)

    def stretch(self):
        """Divided differences (X_{i+1} - X_i) / (s_{i+1} - s_i), wrap pair included."""
        s, X = self.closed()
        return np.diff(X) / np.diff(s)

    def h1_norm(self):
        """||X'||_{L^2} over one label period by the midpoint rule."""
        s, _ = self.closed()
        return float(np.sqrt(np.sum(self.stretch() ** 2 * np.diff(s))))


@dataclass(frozen=True)
class FlowMap:
    seeds: np.ndarray
    times: np.ndarray
    positions: np.ndarray  # shape (len(times), len(seeds))
    wrap_error: float = 0.0


def identity_configuration(n):
    s = -np.pi + TWO_PI * np.arange(n) / n
    return StringConfig(s, s.copy())


def configuration_from_field(f, n, M=None):
    """String whose stretch field is ``f``: X_0 = G_0^{-1} with G_0' = 1/f.

    Labels are uniform over one period P = int 1/f starting at -P/2, and
    G_0(-pi) = -P/2.  G_0 is evaluated spectrally and inverted by Newton.
    """
    K = f.band_limit
    M = M or max(2048, 32 * K + 32)
    Fhat = torus.analyze(1.0 / torus.to_grid(f, M).samples, (M - 1) // 2)
    Fbar = Fhat.mean
    P = TWO_PI * Fbar
    k = np.arange(1, Fhat.capacity + 1)
    a = np.zeros_like(Fhat.coeffs)
    a[1:] = Fhat.coeffs[1:] / (1j * k)
    A = SpectralField(a)

    def G(x):
        return -P / 2 + Fbar * (x + np.pi) + A(x) - A(np.array([-np.pi]))[0]

    s = -P / 2 + P * np.arange(n) / n
    x = -np.pi + (s + P / 2) / Fbar
    for _ in range(50):
        step = (G(x) - s) * f(x)
        x = x - step
        if np.max(np.abs(step)) < 1e-15:
            break
    return StringConfig(s, x, P)


def f0_from_configuration(X0, M):
    """Stretch field of a string configuration on an M-point grid.

    The inverse G_0 of X_0 is the monotone piecewise-linear interpolant; its
    centered difference gives F_0 and f_0 = 1/F_0.  The telescoping sum makes
    int F_0 equal the label period exactly.
    """
    s, X, P = X0.s, X0.X, X0.period
    s_ext = np.concatenate([s - P, s, s + P])
    X_ext = np.concatenate([X - TWO_PI, X, X + TWO_PI])
    x = torus.grid_nodes(M)
    G = np.interp(x, X_ext, s_ext)
    Gp = np.append(G[1:], G[0] + P)
    Gm = np.insert(G[:-1], 0, G[-1] - P)
    F0 = (Gp - Gm) / (2 * TWO_PI / M)
    return GridField(1.0 / F0, positive=True)


class _FieldInterpolant:
    """Fourier coefficients between snapshots.

    ``hermite`` uses the exact time derivatives from the mode system at each
    snapshot (fourth order in the snapshot spacing); ``linear`` interpolates
    the coefficients directly (second order).
    """

    def __init__(self, snapshots, kind="hermite"):
        if kind not in ("hermite", "linear"):
            raise ValueError("interpolation must be 'hermite' or 'linear'")
        if not snapshots or snapshots[0][0] != 0:
            raise ConfigError("advection needs a snapshot at t = 0")
        self.kind = kind
        self.t = np.array([t for t, _ in snapshots])
        self.c = [f.coeffs for _, f in snapshots]
        self.K = max(f.band_limit for _, f in snapshots)
        self.d = [_rhs(c) for c in self.c] if kind == "hermite" else None

    @property
    def t_end(self):
        return self.t[-1]

    def __call__(self, t):
        if t < 0 or t > self.t[-1] * (1 + 1e-14):
            raise ValueError(f"t={t} outside the snapshot span [0, {self.t[-1]}]")
        i = min(int(np.searchsorted(self.t, t, side="right")) - 1, len(self.t) - 2)
        if len(self.t) == 1 or t == self.t[i]:
            c = self.c[max(i, 0)]
        else:
            h = self.t[i + 1] - self.t[i]
            u = (t - self.t[i]) / h
            if self.kind == "linear":
                c = (1 - u) * self.c[i] + u * self.c[i + 1]
            else:
                c = _hermite(self.c[i], self.d[i], self.c[i + 1], self.d[i + 1], h, u)
        c = c.copy()
        c[0] = c[0].real
        c[self.K + 1:] = 0
        return SpectralField(c, self.K)


def field_at(traj, t, interp="hermite"):
    """Field at time t interpolated from the trajectory snapshots."""
    return _FieldInterpolant(traj.snapshots, interp)(t)


def _velocity(f, x):
    return -torus.synthesize(torus.hilbert(f), x)


def _check_order(x, t):
    gaps = np.diff(x)
    if np.any(gaps <= 0) or x[-1] >= x[0] + TWO_PI:
        raise FlowCrossingError(f"particles changed order at t={t:.6g} (min gap {gaps.min():.3e})")


def advect(traj, x, t0, t1, dt=0.01, interp="hermite", _field=None):
    """Positions at t1 of particles at ``x`` at time t0 (RK4 in time)."""
    field = _field or _FieldInterpolant(traj.snapshots, interp)
    x = np.array(x, dtype=float)
    n = max(1, int(np.ceil((t1 - t0) / dt - 1e-12)))
    h = (t1 - t0) / n
    t = t0
    for i in range(n):
        ta, tm, tb = t, t + 0.5 * h, (t1 if i == n - 1 else t + h)
        fa, fm, fb = field(ta), field(tm), field(tb)
        k1 = _velocity(fa, x)
        k2 = _velocity(fm, x + 0.5 * h * k1)
        k3 = _velocity(fm, x + 0.5 * h * k2)
        k4 = _velocity(fb, x + h * k3)
        x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = tb
    return x


def advect_flow(traj, seeds, times=None, dt=0.01, interp="hermite"):
    """Flow map Psi_t(seeds) at the record times covered by the snapshots.

    Particles move with velocity -Hf.  Order is checked after every output
    interval; a wrapped duplicate of the first seed measures how well the
    periodicity Psi_t(x + 2 pi) = Psi_t(x) + 2 pi is kept.
    """
    seeds = np.asarray(seeds, dtype=float)
    if np.any(np.diff(seeds) <= 0) or seeds[-1] >= seeds[0] + TWO_PI:
        raise ConfigError("seeds must be strictly increasing within one period")
    field = _FieldInterpolant(traj.snapshots, interp)
    if times is None:
        times = traj.times[traj.times <= field.t_end * (1 + 1e-14)]
    times = np.asarray(times, dtype=float)
    x = np.append(seeds, seeds[0] + TWO_PI)
    out, t, wrap = [], 0.0, 0.0
    for tk in times:
        if tk > t:
            x = advect(traj, x, t, tk, dt, _field=field)
            t = tk
        _check_order(x[:-1], t)
        wrap = max(wrap, abs(x[-1] - x[0] - TWO_PI))
        out.append(x[:-1].copy())
    return FlowMap(seeds, times, np.array(out), wrap)


def reconstruct_X(flow, X0):
    """X(s, t) = Psi_t(X_0(s)) for a flow seeded at the configuration positions."""
    if flow.seeds.shape != X0.X.shape or np.any(flow.seeds != X0.X):
        raise ConfigError("flow seeds must be the configuration positions X_0(s_i)")
    return [StringConfig(X0.s, pos, X0.period) for pos in flow.positions]


def check_stretch_consistency(configs, flow, traj, tol=1e-3, interp="hermite"):
    """Divided differences of X against f at the midpoint image."""
    field = _FieldInterpolant(traj.snapshots, interp)
    worst, tw = 0.0, 0.0
    for t, X in zip(flow.times, configs):
        _, pos = X.closed()
        mid = 0.5 * (pos[1:] + pos[:-1])
        f = field(t)(mid)
        err = float(np.max(np.abs(X.stretch() / f - 1.0)))
        if err > worst:
            worst, tw = err, t
    return _report("stretch_consistency", worst, tw, tol, f"n={flow.seeds.size}")


TEST_FUNCTIONS = {
    "1": lambda x: np.ones_like(x),
    "cos x": np.cos,
    "sin x": np.sin,
    "cos 2x": lambda x: np.cos(2 * x),
}


def check_pushforward(flow, traj, tol=1e-3, M=1024, interp="hermite"):
    """int phi F(t) against sum_i phi(Psi_t(x_i)) F_0(x_i) dx for uniform seeds."""
    n = flow.seeds.size
    if not np.allclose(flow.seeds, torus.grid_nodes(n), rtol=0, atol=1e-14):
        raise ConfigError("pushforward check needs the uniform grid as seeds")
    field = _FieldInterpolant(traj.snapshots, interp)
    F0 = 1.0 / field(0.0)(flow.seeds)
    L1 = float(np.sum(F0) * TWO_PI / n)
    xq = torus.grid_nodes(M)
    worst, tw, name = 0.0, 0.0, ""
    for t, pos in zip(flow.times, flow.positions):
        F = 1.0 / torus.to_grid(field(t), M).samples
        for label, phi in TEST_FUNCTIONS.items():
            eul = np.sum(phi(xq) * F) * TWO_PI / M
            lag = np.sum(phi(pos) * F0) * TWO_PI / n
            err = abs(eul - lag) / L1
            if err > worst:
                worst, tw, name = err, t, label
    return _report("pushforward", worst, tw, tol, f"worst phi={name}" if name else "")


def well_stretched_constant(traj, t):
    """lambda(t) = min f(., t) from the record at time t; checked against the lower bound."""
    times = traj.times
    hit = np.flatnonzero(times == t)
    if hit.size == 0:
        raise ValueError(f"no record at t={t}")
    r = traj.records[int(hit[0])]
    bound = float(lower_bound_fmin(t, traj.records[0].norm_L1_F))
    if r.fmin < bound:
        raise ArithmeticError(f"well-stretched constant {r.fmin:.6g} below the bound {bound:.6g} at t={t}")
    return r.fmin


def check_string_h1(configs, flow, tol=1e-10):
    """||X(., t)||_{H^1} must be non-increasing in t."""
    norms = np.array([X.h1_norm() for X in configs])
    growth = np.diff(norms) / max(norms.max(), 1e-300)
    i = int(np.argmax(growth)) if growth.size else 0
    worst = max(float(growth[i]), 0.0) if growth.size else 0.0
    return _report("string_h1_monotone", worst, flow.times[i + 1] if growth.size else 0.0, tol)


def string_oscillation(X, f_inf):
    """max - min of X(s) - f_inf s; zero for the limiting uniform string."""
    d = X.X - f_inf * X.s
    return float(d.max() - d.min())


def flow_time_exponent(flow, t_max):
    """Fitted exponent of max_i |Psi_t(x_i) - x_i| against t for 0 < t <= t_max."""
    sel = (flow.times > 0) & (flow.times <= t_max)
    disp = np.max(np.abs(flow.positions[sel] - flow.seeds), axis=1)
    ok = disp > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(flow.times[sel][ok]), np.log(disp[ok]), 1)[0])
