"""
Monitored quantities and invariant checks for simulated trajectories.

A :class:`DiagRecord` is one time slice of every scalar that the theory
constrains: L^p norms of f and F = 1/f, extrema of f and f_x, entropies,
Sobolev and Wiener norms, the Wasserstein distance to the initial label
density, plus running time integrals accumulated by the driver.

Checks are pure functions of a trajectory and return a :class:`CheckReport`.
For checks whose natural output is an exponent or a bound with a floor,
``worst`` is the signed excess over the allowed value and ``tol`` is 0.
"""
from dataclasses import dataclass, field, fields
import json
import logging
from importlib import resources

import numpy as np
from scipy.optimize import linprog

from . import torus
from .errors import InputError, PositivityFailure
from .torus import TWO_PI, GridField

log = logging.getLogger(__name__)

ENTROPY_FLOOR = 1e-300

#: quantities integrated in time by the driver, in this order
INTEGRANDS = (
    "dissipation",       # int f Lambda f
    "hhalf_lnf_sq",      # ||ln f||^2 in H^{1/2}
    "F_lambda_f",        # int F Lambda f
    "clip_term",         # int (Phi - F Phi')(F) Lambda f for the clipped square
    "fbar",              # mean of f
    "f_HF_sq",           # int f (HF)^2
    "hminus_rhs",        # 2 pi Fbar - Fbar^2 int f
)


@dataclass(frozen=True)
class DiagRecord:
    t: float
    fbar: float
    fmin: float
    fmax: float
    norm_L1_f: float
    norm_L2_f: float
    norm_L4_f: float
    norm_L1_F: float
    norm_L2_F: float
    norm_L4_F: float
    hhalf_f: float
    hhalf_lnf: float
    h1_sqrtf: float
    entropy_FlnF: float
    dissipation: float
    dissipation_integral: float
    energy_residual: float
    dxf_min: float
    dxf_max: float
    wiener01: float
    wiener01_nu: float
    holder_alpha: float
    hminus_half_F: float
    w1_to_initial: float
    abs_c1: float
    abs_c_top: float
    l2_dev: float
    f_HF_sq: float
    hminus_rhs: float
    phi_clip_F: float
    int_hhalf_lnf_sq: float
    int_F_lambda_f: float
    int_clip_term: float
    int_fbar: float
    int_f_HF_sq: float
    int_hminus_rhs: float

    @classmethod
    def header(cls):
        return [f.name for f in fields(cls)]

    def values(self):
        return [getattr(self, name) for name in self.header()]


@dataclass(frozen=True)
class DiagContext:
    """Initial-data quantities shared by every record of one run."""

    M: int
    alpha: float
    K0: int
    L1_f0: float
    L1_F0: float
    f_inf: float
    clip_a: float
    clip_b: float
    F0_samples: np.ndarray = field(repr=False)

    @classmethod
    def from_initial(cls, f0, M=None, alpha=0.1):
        K = f0.band_limit
        M = max(M or 512, 8 * K + 8)
        g = torus.to_grid(f0, M).samples
        if not g.min() > 0:
            raise PositivityFailure("initial field is not positive on the diagnostic grid")
        F0 = 1.0 / g
        L1_F0 = torus.norm_lp(F0, 1)
        lo, hi = refined_extrema(f0, 0, M)
        F0.setflags(write=False)
        return cls(M=M, alpha=alpha, K0=K, L1_f0=torus.norm_lp(g, 1), L1_F0=L1_F0,
                   f_inf=TWO_PI / L1_F0, clip_a=1.0 / hi, clip_b=1.0 / lo, F0_samples=F0)


@dataclass(frozen=True)
class CheckReport:
    name: str
    status: str
    worst: float
    t_worst: float
    tol: float
    note: str = ""

    @property
    def passed(self):
        return self.status != "fail"

    def line(self):
        return (f"{self.name:<34} {self.status.upper():<7} worst={self.worst:.3e} "
                f"t={self.t_worst:.4g} tol={self.tol:.1e}" + (f"  {self.note}" if self.note else ""))


def _report(name, worst, t_worst, tol, note=""):
    status = "pass" if worst <= tol else "fail"
    return CheckReport(name, status, float(worst), float(t_worst), float(tol), note)


def _skip(name, note, tol=0.0):
    return CheckReport(name, "skipped", float("nan"), float("nan"), tol, note)


# --------------------------------------------------------------------------
# scalar helpers

def nu_conservative(t, f_inf):
    """Analyticity radius 0.5 ln((1 + exp(2 f_inf t)) / 2), overflow safe."""
    t = np.asarray(t, dtype=float)
    return 0.5 * (np.logaddexp(0.0, 2.0 * f_inf * t) - np.log(2.0))


def trilinear_ratio(f, nu):
    """Ratio of the weighted nonlinearity to (1/2) e^{-2 nu} |f|_{F^{0,1}_nu} |f|_{F^{1,1}_nu}.

    The numerator is sum_{k != 0} e^{nu |k|} sum_{j >= 1} 2 (|k| + 2j) |c_{k+j}| |c_j|,
    the majorant of the nonlinear mode forcing.  Its supremum is the
    analyticity constant C_*; in this norm convention C_* <= 4.
    """
    a = np.abs(f.coeffs)
    K = a.size - 1
    if K < 2:
        return 0.0
    k = np.arange(1, K + 1)[:, None]
    j = np.arange(1, K + 1)[None, :]
    ok = k + j <= K
    prod = np.where(ok, 2.0 * (k + 2 * j) * a[np.minimum(k + j, K)] * a[j], 0.0)
    num = 2.0 * float(np.sum(np.exp(nu * k[:, 0]) * prod.sum(axis=1)))
    den = 0.5 * np.exp(-2.0 * nu) * torus.norm_wiener(f, 0, nu) * torus.norm_wiener(f, 1, nu)
    return num / den if den > 0 else 0.0


def nu_theta(t, f_inf, theta):
    """Analyticity radius 0.5 ln(theta + (1 - theta) exp(2 f_inf t))."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    t = np.asarray(t, dtype=float)
    return 0.5 * np.logaddexp(np.log(theta), np.log1p(-theta) + 2.0 * f_inf * t)


def lower_bound_fmin(t, L1_F0):
    """Explicit lower bound 8/||F0|| exp(-coth(4t / (pi ||F0||))) for t > 0."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        arg = 4.0 * t / (np.pi * L1_F0)
        out = 8.0 / L1_F0 * np.exp(-1.0 / np.tanh(arg))
    return np.where(t > 0, out, 0.0)


def two_mode_closed_form(a0, b0, t):
    """Mean and |c_1| of the solution with modes {0, +-1} only.

    With a = c_0 and b = |c_1| the system is a' = -4 b^2, b' = -a b, whose
    first integral a^2 - 4 b^2 = c^2 gives a(t) = c coth(c t + phi0).
    """
    if not a0 > 2 * b0 >= 0:
        raise ValueError("need a0 > 2 b0 >= 0 for a positive two-mode field")
    t = np.asarray(t, dtype=float)
    if b0 == 0:
        return np.full(t.shape, float(a0)), np.zeros(t.shape)
    c = np.sqrt(a0 * a0 - 4 * b0 * b0)
    # arctanh(c / a0) without cancellation when b0 << a0
    phi0 = np.log(a0 + c) - np.log(2 * b0)
    a = c / np.tanh(c * t + phi0)
    # b from the exact sinh form avoids cancellation in a^2 - c^2
    with np.errstate(over="ignore"):
        b = 0.5 * c / np.abs(np.sinh(c * t + phi0))
    return a, b


def refined_extrema(f, order=0, M=None):
    """(min, max) of the order-th derivative of f, Newton-polished from the grid."""
    g = f
    for _ in range(order):
        g = torus.derivative(g)
    K = max(g.band_limit, 1)
    M = M or max(512, 8 * K + 8)
    x = torus.grid_nodes(M)
    vals = torus.to_grid(g, M).samples
    if g.band_limit == 0:
        v = float(vals[0])
        return v, v
    g1 = torus.derivative(g)
    g2 = torus.derivative(g1)
    h = TWO_PI / M
    out = []
    for i, better in ((int(np.argmin(vals)), np.less), (int(np.argmax(vals)), np.greater)):
        x0 = xk = x[i]
        best = vals[i]
        for _ in range(20):
            d2 = g2(np.array([xk]))[0]
            if d2 == 0:
                break
            step = g1(np.array([xk]))[0] / d2
            xk -= step
            if abs(xk - x0) > 2 * h:
                break
            if abs(step) < 1e-15:
                break
        if abs(xk - x0) <= 2 * h:
            v = g(np.array([xk]))[0]
            if better(v, best):
                best = v
        out.append(float(best))
    return out[0], out[1]


def holder_seminorm(g, alpha, n_max=512):
    """Discrete C^alpha seminorm: max |g(x)-g(y)| / d(x,y)^alpha over grid pairs.

    The grid is subsampled to at most ``n_max`` points; the result is a lower
    bound on the true seminorm.
    """
    if not 0 < alpha < 0.2:
        raise ValueError("alpha must lie in (0, 1/5)")
    s = g.samples if isinstance(g, GridField) else np.asarray(g, dtype=float)
    stride = max(1, -(-s.size // n_max))
    s = s[::stride]
    x = torus.grid_nodes(g.M if isinstance(g, GridField) else len(g))[::stride]
    d = np.abs(x[:, None] - x[None, :])
    d = np.minimum(d, TWO_PI - d)
    np.fill_diagonal(d, np.inf)
    return float(np.max(np.abs(s[:, None] - s[None, :]) / d ** alpha))


def _masses(g):
    s = g.samples if isinstance(g, GridField) else np.asarray(g, dtype=float)
    if np.any(s < 0):
        raise InputError("densities must be non-negative")
    return s


def wasserstein1_circle(mu, nu, rtol=1e-8):
    """W_1 between two densities on the circle sampled on the same grid.

    Inputs are normalized to unit mass; W_1 = min_c int |U - c| where U is
    the cumulative distribution of mu - nu, attained at the median of U.
    """
    p, q = _masses(mu), _masses(nu)
    if p.size != q.size:
        raise InputError("densities must share the grid")
    mp, mq = p.sum(), q.sum()
    if not mp > 0 or not mq > 0:
        raise InputError("densities must have positive mass")
    if abs(mp - mq) > rtol * max(mp, mq):
        raise InputError(f"mass mismatch {abs(mp - mq) / max(mp, mq):.2e} exceeds {rtol:g}")
    U = np.cumsum(p / mp - q / mq)
    return float(np.sum(np.abs(U - np.median(U))) * TWO_PI / p.size)


def wasserstein1_lp(mu, nu):
    """W_1 on the circle by the discrete transport linear program (test oracle)."""
    p, q = _masses(mu), _masses(nu)
    n = p.size
    if n > 128:
        raise ValueError("the LP oracle is limited to 128 points")
    p, q = p / p.sum(), q / q.sum()
    x = torus.grid_nodes(n)
    d = np.abs(x[:, None] - x[None, :])
    cost = np.minimum(d, TWO_PI - d)
    rows = np.kron(np.eye(n), np.ones(n))
    cols = np.kron(np.ones(n), np.eye(n))
    res = linprog(cost.ravel(), A_eq=np.vstack([rows, cols]), b_eq=np.concatenate([p, q]),
                  bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if not res.success:
        raise RuntimeError(res.message)
    return float(res.fun)


# --------------------------------------------------------------------------
# records

def _clip_phi(F, a, b):
    return np.where(F < a, (F - a) ** 2, np.where(F > b, (F - b) ** 2, 0.0))


def _clip_psi(F, a, b):
    # Phi - F Phi'
    return np.where(F < a, a * a - F * F, np.where(F > b, b * b - F * F, 0.0))


class _Slice:
    """Grid samples and spectra shared by the integrands and the record."""

    def __init__(self, f, ctx):
        K = f.band_limit
        M = max(ctx.M, 8 * K + 8)
        self.M = M
        self.f = f
        self.g = torus.to_grid(f, M).samples
        if not self.g.min() > 0:
            raise PositivityFailure(f"min f = {self.g.min():.3e} on the diagnostic grid")
        self.F = 1.0 / self.g
        self.Kg = (M - 1) // 2
        self.Fhat = torus.analyze(self.F, self.Kg)
        self.lam_f = torus.to_grid(torus.half_laplacian(f), M).samples
        self.lnf = torus.analyze(np.log(self.g), self.Kg)

    def quad(self, v):
        return float(TWO_PI / self.M * np.sum(v))


def integrands(f, ctx, sl=None):
    """Instantaneous values of the time-integrated quantities, ordered as INTEGRANDS."""
    sl = sl or _Slice(f, ctx)
    HF = torus.to_grid(torus.hilbert(sl.Fhat), sl.M).samples
    int_F = sl.quad(sl.F)
    Fbar = int_F / TWO_PI
    return np.array([
        sl.quad(sl.g * sl.lam_f),
        torus.norm_sobolev(sl.lnf, 0.5) ** 2,
        sl.quad(sl.F * sl.lam_f),
        sl.quad(_clip_psi(sl.F, ctx.clip_a, ctx.clip_b) * sl.lam_f),
        f.mean,
        sl.quad(sl.g * HF * HF),
        TWO_PI * Fbar - Fbar * Fbar * sl.quad(sl.g),
    ])


def record(s, ctx, integrals=None):
    """Evaluate every monitored quantity for the state ``s``."""
    f = s.field
    sl = _Slice(f, ctx)
    inst = integrands(f, ctx, sl)
    acc = np.zeros(len(INTEGRANDS)) if integrals is None else np.asarray(integrals)
    g, F = sl.g, sl.F
    L1_f, L1_F = torus.norm_lp(g, 1), torus.norm_lp(F, 1)
    if L1_f * L1_F < TWO_PI ** 2 * (1 - 1e-12):
        raise AssertionError(f"Cauchy-Schwarz violated: {L1_f * L1_F} < 4 pi^2")
    fmin, fmax = refined_extrema(f, 0, sl.M)
    dmin, dmax = refined_extrema(f, 1, sl.M)
    sqrtf = torus.analyze(np.sqrt(g), sl.Kg)
    Fs = np.maximum(F, ENTROPY_FLOOR)
    c = f.coeffs
    w1 = wasserstein1_circle(GridField(ctx.F0_samples), GridField(F), rtol=np.inf) if s.t > 0 else 0.0
    return DiagRecord(
        t=float(s.t),
        fbar=f.mean,
        fmin=fmin,
        fmax=fmax,
        norm_L1_f=L1_f,
        norm_L2_f=torus.norm_lp(g, 2),
        norm_L4_f=torus.norm_lp(g, 4),
        norm_L1_F=L1_F,
        norm_L2_F=torus.norm_lp(F, 2),
        norm_L4_F=torus.norm_lp(F, 4),
        hhalf_f=torus.norm_sobolev(f, 0.5),
        hhalf_lnf=torus.norm_sobolev(sl.lnf, 0.5),
        h1_sqrtf=torus.norm_sobolev(sqrtf, 1.0),
        entropy_FlnF=sl.quad(Fs * np.log(Fs)),
        dissipation=float(inst[0]),
        dissipation_integral=float(acc[0]),
        energy_residual=(0.5 * L1_f + acc[0] - 0.5 * ctx.L1_f0) / (0.5 * ctx.L1_f0),
        dxf_min=dmin,
        dxf_max=dmax,
        wiener01=torus.norm_wiener(f, 0, 0.0),
        wiener01_nu=torus.norm_wiener(f, 0, float(nu_conservative(s.t, ctx.f_inf))),
        holder_alpha=holder_seminorm(GridField(g), ctx.alpha),
        hminus_half_F=torus.norm_sobolev(sl.Fhat.without_mean(), -0.5),
        w1_to_initial=w1 * L1_F / ctx.L1_F0,
        abs_c1=float(abs(c[1])) if c.size > 1 else 0.0,
        abs_c_top=float(abs(c[ctx.K0])) if ctx.K0 < c.size else 0.0,
        l2_dev=torus.norm_lp(g - ctx.f_inf, 2),
        f_HF_sq=float(inst[5]),
        hminus_rhs=float(inst[6]),
        phi_clip_F=sl.quad(_clip_phi(F, ctx.clip_a, ctx.clip_b)),
        int_hhalf_lnf_sq=float(acc[1]),
        int_F_lambda_f=float(acc[2]),
        int_clip_term=float(acc[3]),
        int_fbar=float(acc[4]),
        int_f_HF_sq=float(acc[5]),
        int_hminus_rhs=float(acc[6]),
    )


# --------------------------------------------------------------------------
# checks

def _cols(traj, *names):
    return [traj.column(n) for n in names]


def _tol(traj, name, tol):
    if tol is not None:
        return tol
    return traj.config.tol(name)


def _initial(traj):
    for t, f in traj.snapshots:
        if t == 0:
            return f
    return getattr(traj, "initial", None)


def _scale(*arrays):
    m = max(float(np.max(np.abs(a))) for a in arrays)
    return m if m > 0 else 1.0


def check_energy_identity(traj, tol=None):
    """Relative residual of 1/2 ||f||_1 + int_0^t int f Lambda f = 1/2 ||f_0||_1."""
    tol = _tol(traj, "energy", tol)
    t, r = _cols(traj, "t", "energy_residual")
    i = int(np.argmax(np.abs(r)))
    return _report("energy_identity", abs(r[i]), t[i], tol)


def check_conservation_F(traj, tol=None):
    """Relative drift of ||F||_1 and of the implied equilibrium 2 pi / ||F||_1."""
    tol = _tol(traj, "conservation_F", tol)
    t, L1 = _cols(traj, "t", "norm_L1_F")
    drift = np.abs(L1 / L1[0] - 1.0)
    i = int(np.argmax(drift))
    return _report("conservation_F", drift[i], t[i], tol, f"f_inf={TWO_PI / L1[0]:.12g}")


MONOTONE = {
    "L1_f": ("norm_L1_f", -1), "L2_f": ("norm_L2_f", -1), "L4_f": ("norm_L4_f", -1),
    "L1_F": ("norm_L1_F", -1), "L2_F": ("norm_L2_F", -1), "L4_F": ("norm_L4_F", -1),
    "fmax": ("fmax", -1), "fmin": ("fmin", +1),
    "dxf_max": ("dxf_max", -1), "dxf_min": ("dxf_min", +1),
    "hhalf_lnf": ("hhalf_lnf", -1), "h1_sqrtf": ("h1_sqrtf", -1),
    "entropy_FlnF": ("entropy_FlnF", -1),
}


def check_monotone(traj, quantity, tol=None):
    """Monotonicity of a recorded quantity with slack tol * max|q|.

    For the entropy the integrated production bound
    int F ln F (t) - int F ln F (0) + int_0^t ||ln f||^2_{H^1/2} <= slack
    is checked as well.
    """
    if quantity not in MONOTONE:
        raise ValueError(f"unknown quantity {quantity!r}; known: {', '.join(MONOTONE)}")
    tol = _tol(traj, "monotone", tol)
    col, sign = MONOTONE[quantity]
    t, q = _cols(traj, "t", col)
    scale = _scale(q)
    if q.size < 2:
        return _report(f"monotone[{quantity}]", 0.0, t[0], tol)
    # positive entries are violations of the stated direction
    viol = -sign * np.diff(q) / scale
    i = int(np.argmax(viol))
    worst, tw = max(viol[i], 0.0), t[i + 1]
    note = ""
    if quantity == "entropy_FlnF":
        prod = traj.column("int_hhalf_lnf_sq")
        excess = (q - q[0] + prod) / scale
        j = int(np.argmax(excess))
        note = f"production excess={excess[j]:.2e}"
        if excess[j] > worst:
            worst, tw = excess[j], t[j]
    return _report(f"monotone[{quantity}]", worst, tw, tol, note)


def load_constants():
    """Empirical constants written by the calibration sweep (empty if absent)."""
    try:
        text = resources.files("tpeskin").joinpath("data/constants.json").read_text()
    except (FileNotFoundError, OSError):
        return {}
    return json.loads(text)


def _fit_slope(x, y):
    return float(np.polyfit(x, y, 1)[0])


def check_explicit_bounds(traj, C=None, slope_tol=None, t_min=1e-3):
    """Lower bound for min f, constant-C upper bound and the t^{-1/2} scaling of max f.

    ``worst`` is the largest signed excess over the three allowances
    (lower-bound gap, relative upper-bound excess, slope deficit below
    -1/2 - slope_tol); the check passes when it is <= 0.
    """
    slope_tol = _tol(traj, "slope", slope_tol)
    t, fmin, fmax = _cols(traj, "t", "fmin", "fmax")
    L1_f0, L1_F0 = traj.records[0].norm_L1_f, traj.records[0].norm_L1_F
    pos = t > 0
    parts, notes = [], []
    lb = lower_bound_fmin(t, L1_F0)
    gap = np.where(pos, lb - fmin, -np.inf)
    i = int(np.argmax(gap))
    parts.append((gap[i] if pos.any() else -np.inf, t[i]))
    notes.append(f"lower_gap={gap[i]:.3e}" if pos.any() else "lower=n/a")

    if C is None:
        C = load_constants().get("linf_smoothing_C")
    short = pos & (t <= 1.0 / L1_f0)
    if C is not None and short.any():
        ratio = fmax[short] * np.sqrt(t[short]) / (C * np.sqrt(L1_f0)) - 1.0
        j = int(np.argmax(ratio))
        parts.append((ratio[j], t[short][j]))
        notes.append(f"upper_excess={ratio[j]:.3e} (C={C:.4g})")
    else:
        notes.append("upper=n/a")

    window = (t >= t_min) & (t <= 1.0 / L1_f0)
    if window.sum() >= 3:
        slope = _fit_slope(np.log(t[window]), np.log(fmax[window]))
        parts.append((-0.5 - slope_tol - slope, t[window][-1]))
        notes.append(f"slope={slope:.4f}")
    else:
        notes.append("slope=n/a")
    worst, tw = max(parts, key=lambda p: p[0])
    return _report("explicit_bounds", worst, tw, 0.0, " ".join(notes))


PHI = ("ylny", "inverse", "clipped_square")


def check_dissipative_inequality(traj, phi, tol=None):
    """int Phi(F(t)) + int_0^t int (Phi - F Phi')(F) Lambda f <= int Phi(F_0) + slack."""
    tol = _tol(traj, "dissipative", tol)
    if phi == "ylny":
        lhs = traj.column("entropy_FlnF") - traj.column("int_F_lambda_f")
    elif phi == "inverse":
        lhs = traj.column("norm_L1_f") + 2.0 * traj.column("dissipation_integral")
    elif phi == "clipped_square":
        lhs = traj.column("phi_clip_F") + traj.column("int_clip_term")
    else:
        raise ValueError(f"unknown Phi {phi!r}; known: {', '.join(PHI)}")
    t = traj.times
    excess = lhs - lhs[0]
    i = int(np.argmax(excess))
    note = ""
    if phi == "clipped_square":
        note = f"max int Phi(F)={traj.column('phi_clip_F').max():.2e}"
    return _report(f"dissipative[{phi}]", max(excess[i], 0.0), t[i], tol, note)


def _centered_derivative(t, q):
    h1, h2 = t[1:-1] - t[:-2], t[2:] - t[1:-1]
    return (-h2 / (h1 * (h1 + h2)) * q[:-2] + (h2 - h1) / (h1 * h2) * q[1:-1]
            + h1 / (h2 * (h1 + h2)) * q[2:])


def check_hminus_identity(traj, tol=None):
    """d/dt ||Lambda^{-1/2}(F - Fbar)||^2 + int f (HF)^2 = 2 pi Fbar - Fbar^2 int f.

    The derivative is a three-point difference across adjacent records; the
    residual is relative to the largest right-hand side.  The sign of the
    right side and the time-integrated identity are checked too.
    """
    tol = _tol(traj, "hminus", tol)
    t, Q, fh, rhs = _cols(traj, "t", "hminus_half_F", "f_HF_sq", "hminus_rhs")
    Q = Q * Q
    target = rhs - fh
    scale = _scale(target)
    if t.size < 3:
        return _skip("hminus_identity", "needs at least three records", tol)
    res = np.abs(_centered_derivative(t, Q) - target[1:-1]) / scale
    i = int(np.argmax(res))
    worst, tw = res[i], t[i + 1]
    integ = np.abs(Q - Q[0] + traj.column("int_f_HF_sq") - traj.column("int_hminus_rhs")) / _scale(Q)
    sign = rhs / scale
    j, k = int(np.argmax(integ)), int(np.argmax(sign))
    note = f"integrated={integ[j]:.2e} max_rhs={rhs[k]:.2e}"
    if sign[k] > 1e-12:
        worst, tw, note = max(worst, np.inf), t[k], note + " rhs>0"
    if integ[j] > worst:
        worst, tw = integ[j], t[j]
    elif worst > tol and integ[j] <= tol:
        note += f" (differencing limited; record spacing {np.max(np.diff(t)):.3g} too coarse)"
    return _report("hminus_identity", worst, tw, tol, note)


def check_analyticity(traj, theta=None, tol=None):
    """||f(t)||_{F^{0,1}_{nu(t)}} <= 2 ||f_0||_{F^{0,1}} for small data.

    Uses the conservative radius nu(t) = 0.5 ln((1 + e^{2 f_inf t}) / 2)
    unless ``theta`` is given, in which case the theta-family radius is
    evaluated on the stored snapshots.
    """
    tol = _tol(traj, "analyticity", tol)
    r0 = traj.records[0]
    f_inf = TWO_PI / r0.norm_L1_F
    w0 = r0.wiener01
    if w0 > 0.05 * f_inf:
        return _skip("analyticity", f"hypothesis not met: ||f0||={w0:.3g} > 0.05 f_inf={0.05 * f_inf:.3g}", tol)
    if theta is None:
        t, lhs = _cols(traj, "t", "wiener01_nu")
    else:
        if not traj.snapshots:
            return _skip("analyticity", "theta radius needs snapshots", tol)
        t = np.array([ts for ts, _ in traj.snapshots])
        lhs = np.array([torus.norm_wiener(f, 0, float(nu_theta(ts, f_inf, theta))) for ts, f in traj.snapshots])
    excess = (lhs - 2 * w0) / (2 * w0) if w0 > 0 else lhs
    i = int(np.argmax(excess))
    return _report("analyticity", max(excess[i], 0.0), t[i], tol,
                   f"max ratio={lhs[i] / (2 * w0) if w0 > 0 else 0.0:.4f}")


def check_decay_to_equilibrium(traj, window=10.0, tol=None):
    """Monotone L^2 approach to f_inf and exponential rate f_inf of |c_1|.

    ``worst`` is the relative rate error of a log-linear fit over the last
    ``window`` time units; growth of ||f - f_inf||_2 over the second half of
    the run fails the check outright.
    """
    tol = _tol(traj, "decay_rate", tol)
    t, dev, c1 = _cols(traj, "t", "l2_dev", "abs_c1")
    f_inf = TWO_PI / traj.records[0].norm_L1_F
    if dev.max() <= 1e-14 * f_inf:
        return _report("decay_to_equilibrium", 0.0, t[-1], tol, "at equilibrium")
    if t[-1] < window:
        return _skip("decay_to_equilibrium", f"run shorter than the fit window {window:g}", tol)
    late = t >= t[-1] / 2
    growth = float(np.max(np.diff(dev[late]), initial=0.0)) / _scale(dev)
    if growth > traj.config.tol("monotone"):
        return _report("decay_to_equilibrium", np.inf, t[-1], tol, f"L2 distance grew by {growth:.2e}")
    tw = t[-1]
    win = (t >= t[-1] - window) & (c1 > 1e-250)
    if win.sum() < 3:
        return _skip("decay_to_equilibrium", "too few records with nonzero |c_1| in the window", tol)
    rate = -_fit_slope(t[win], np.log(c1[win]))
    err = abs(rate - f_inf) / f_inf
    return _report("decay_to_equilibrium", err, tw, tol,
                   f"rate={rate:.5f} f_inf={f_inf:.5f} window=[{t[win][0]:.3g},{t[win][-1]:.3g}]")


def check_two_mode_closed_form(traj, tol=None):
    """Mean against a(t) = c coth(c t + phi0) for data with modes {0, +-1} only."""
    tol = _tol(traj, "closed_form", tol)
    f0 = _initial(traj)
    if f0 is None or f0.band_limit != 1:
        return _skip("two_mode_closed_form", "initial data is not a two-mode field", tol)
    t, fbar = _cols(traj, "t", "fbar")
    a, _ = two_mode_closed_form(f0.mean, abs(f0.coeffs[1]), t)
    err = np.abs(fbar / a - 1.0)
    i = int(np.argmax(err))
    return _report("two_mode_closed_form", err[i], t[i], tol)


def check_first_integral(traj, tol=None):
    """Drift of fbar^2 - 4 |c_1|^2 for two-mode data."""
    tol = _tol(traj, "first_integral", tol)
    f0 = _initial(traj)
    if f0 is None or f0.band_limit != 1:
        return _skip("first_integral", "initial data is not a two-mode field", tol)
    t, a, b = _cols(traj, "t", "fbar", "abs_c1")
    q = a * a - 4 * b * b
    drift = np.abs(q - q[0])
    i = int(np.argmax(drift))
    return _report("first_integral", drift[i], t[i], tol)


def check_single_mode_decay(traj, tol=None):
    """|c_k(t)| = |c_k(0)| exp(-k int_0^t fbar) for data with one mode k >= 1.

    A lone mode has no partner above it, so its equation is linear in c_k.
    """
    tol = _tol(traj, "single_mode", tol)
    f0 = _initial(traj)
    nz = np.flatnonzero(f0.coeffs[1:]) + 1 if f0 is not None else np.array([])
    if nz.size != 1:
        return _skip("single_mode_decay", "initial data is not a single-mode field", tol)
    k = int(nz[0])
    t, top, I = _cols(traj, "t", "abs_c_top", "int_fbar")
    pred = top[0] * np.exp(-k * I)
    err = np.abs(top / pred - 1.0)
    i = int(np.argmax(err))
    return _report("single_mode_decay", err[i], t[i], tol, f"k={k}")


def check_wasserstein_continuity(traj, t_range=(1e-4, 1e-2), floor=None):
    """Fitted exponent of W_1(F_0, F(t)) against t on a short window.

    ``worst`` is floor - exponent (pass when <= 0).
    """
    floor = _tol(traj, "w1_exponent", floor)
    t, w = _cols(traj, "t", "w1_to_initial")
    win = (t >= t_range[0]) & (t <= t_range[1]) & (w > 0)
    if win.sum() < 3:
        if np.all(w == 0):
            return _report("wasserstein_continuity", 0.0, 0.0, 0.0, "stationary")
        return _skip("wasserstein_continuity", "too few records in the fit window")
    p = _fit_slope(np.log(t[win]), np.log(w[win]))
    return _report("wasserstein_continuity", floor - p, t[win][-1], 0.0, f"exponent={p:.4f} floor={floor}")


def run_all_checks(traj, C=None, theta=None):
    """Every applicable check for one trajectory, in a fixed order."""
    reports = [
        check_energy_identity(traj),
        check_conservation_F(traj),
    ]
    reports += [check_monotone(traj, q) for q in MONOTONE]
    reports += [
        check_explicit_bounds(traj, C=C),
    ]
    reports += [check_dissipative_inequality(traj, phi) for phi in PHI]
    reports += [
        check_hminus_identity(traj),
        check_analyticity(traj, theta=theta),
        check_decay_to_equilibrium(traj),
        check_two_mode_closed_form(traj),
        check_first_integral(traj),
        check_single_mode_decay(traj),
        check_wasserstein_continuity(traj),
    ]
    return reports
