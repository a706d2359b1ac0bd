"""
Spectral fields and operators on the torus T = [-pi, pi).

A real 2*pi-periodic band-limited function is stored by its nonnegative
Fourier coefficients

    c_k = (1 / 2 pi) * int_T f(x) exp(-i k x) dx,    k = 0 .. K_cap,

with c_{-k} = conj(c_k) implied.  Every Fourier multiplier used by the
model (Hilbert transform, half-Laplacian, derivative, Fejer smoothing)
acts coefficientwise, so it is exact and never raises the band limit.

Grid samples live on the uniform nodes x_j = -pi + 2 pi j / M.  The
principal-value quadratures in this module evaluate the singular-integral
definitions of H and (-Delta)^{1/2} directly on those samples and are kept
as independent oracles for the multipliers.

Norm conventions
----------------
Homogeneous Sobolev seminorms use the integral normalization

    ||f||_{H^s}^2 = 2 pi * sum_{k != 0} |k|^{2s} |c_k|^2,

so that ||f||_{H^{1/2}}^2 = int_T f (-Delta)^{1/2} f dx exactly.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import AliasingError, MeanZeroError

TWO_PI = 2.0 * np.pi


def grid_nodes(M):
    """Uniform nodes x_j = -pi + 2 pi j / M, j = 0..M-1."""
    if M < 2:
        raise ValueError(f"grid size must be >= 2, got {M}")
    return -np.pi + TWO_PI * np.arange(M) / M


def wrap(x):
    """Map points into [-pi, pi)."""
    return np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi


@dataclass(frozen=True)
class GridField:
    """Real samples of a periodic function on the uniform grid of size M."""

    samples: np.ndarray
    positive: bool = False

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("GridField needs a 1-d array with at least 2 samples")
        if not np.all(np.isfinite(s)):
            raise ValueError("GridField samples must be finite")
        if self.positive and not s.min() > 0:
            raise ValueError("GridField flagged positive has a non-positive sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def M(self):
        return self.samples.size

    @property
    def x(self):
        return grid_nodes(self.M)

    @classmethod
    def from_function(cls, func, M, positive=False):
        return cls(func(grid_nodes(M)), positive=positive)


@dataclass(frozen=True)
class SpectralField:
    """Band-limited real field stored as coefficients c_0..c_{capacity}.

    ``band_limit`` is the declared degree: coefficients above it are zero.
    """

    coeffs: np.ndarray
    band_limit: int = field(default=-1)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise ValueError("SpectralField needs at least the mean coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("SpectralField coefficients must be finite")
        if abs(c[0].imag) > 1e-14 * max(1.0, abs(c[0].real)):
            raise ValueError("c_0 must be real for a real field")
        c[0] = c[0].real
        K = self.band_limit
        if K < 0:
            nz = np.flatnonzero(c)
            K = int(nz[-1]) if nz.size else 0
        if K > c.size - 1:
            raise ValueError(f"band_limit {K} exceeds capacity {c.size - 1}")
        if np.any(c[K + 1:] != 0):
            raise ValueError("nonzero coefficients above the declared band limit")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "band_limit", int(K))

    @property
    def capacity(self):
        return self.coeffs.size - 1

    @property
    def mean(self):
        return float(self.coeffs[0].real)

    @classmethod
    def from_coeffs(cls, coeffs, capacity=None, band_limit=-1):
        c = np.asarray(coeffs, dtype=complex).ravel()
        if capacity is not None:
            if capacity < c.size - 1 and np.any(c[capacity + 1:] != 0):
                raise ValueError("coefficients do not fit in the requested capacity")
            out = np.zeros(capacity + 1, dtype=complex)
            n = min(c.size, capacity + 1)
            out[:n] = c[:n]
            c = out
        return cls(c, band_limit)

    @classmethod
    def constant(cls, value, capacity=0):
        c = np.zeros(capacity + 1, dtype=complex)
        c[0] = value
        return cls(c, 0)

    def replace(self, coeffs, band_limit=None):
        """New field with the same capacity; band limit kept unless given."""
        K = self.band_limit if band_limit is None else band_limit
        return SpectralField(coeffs, K)

    def with_capacity(self, capacity):
        if capacity < self.band_limit:
            raise ValueError(f"capacity {capacity} is below the band limit {self.band_limit}")
        return SpectralField.from_coeffs(self.coeffs, capacity, self.band_limit)

    def without_mean(self):
        c = self.coeffs.copy()
        c[0] = 0.0
        return SpectralField(c, self.band_limit)

    def effective_band_limit(self, tol=0.0):
        nz = np.flatnonzero(np.abs(self.coeffs) > tol)
        return int(nz[-1]) if nz.size else 0

    def __call__(self, points):
        return synthesize(self, points)


# --------------------------------------------------------------------------
# transforms

def analyze(g, K, capacity=None):
    """Fourier coefficients c_0..c_K of grid samples.

    Exact when the samples come from a trig polynomial of degree <= K and
    M >= 2K + 1.
    """
    samples = g.samples if isinstance(g, GridField) else np.asarray(g, dtype=float)
    M = samples.size
    if M < 2 * K + 1:
        raise AliasingError(f"grid of size {M} cannot resolve band limit {K} (need >= {2 * K + 1})")
    spectrum = np.fft.rfft(samples)[: K + 1] / M
    spectrum *= (-1.0) ** np.arange(K + 1)  # nodes start at -pi
    spectrum[0] = spectrum[0].real
    return SpectralField.from_coeffs(spectrum, capacity if capacity is not None else K, K)


def synthesize(f, points):
    """Evaluate c_0 + 2 sum_k Re(c_k exp(ikx)) at arbitrary points."""
    x = wrap(points)
    K = f.band_limit
    c = f.coeffs[: K + 1]
    out = np.full(x.shape, c[0].real)
    if K == 0:
        return out
    k = np.arange(1, K + 1)
    phase = np.exp(1j * np.multiply.outer(x, k))
    out += 2.0 * (phase @ c[1:]).real
    return out


def to_grid(f, M):
    """Samples of ``f`` on the uniform M-point grid (FFT when M > 2K)."""
    K = f.band_limit
    if M < 2 * K + 1:
        return GridField(synthesize(f, grid_nodes(M)))
    spectrum = np.zeros(M // 2 + 1, dtype=complex)
    spectrum[: K + 1] = f.coeffs[: K + 1] * (-1.0) ** np.arange(K + 1) * M
    return GridField(np.fft.irfft(spectrum, n=M))


def multiply(f, g, capacity=None):
    """Exact product of two band-limited fields (dealiased grid product)."""
    K = f.band_limit + g.band_limit
    M = 2 * K + 1
    prod = to_grid(f, M).samples * to_grid(g, M).samples
    cap = max(K, f.capacity, g.capacity) if capacity is None else capacity
    return analyze(prod, K, cap)


# --------------------------------------------------------------------------
# Fourier multipliers

def _kvec(f):
    return np.arange(f.capacity + 1)


def hilbert(f):
    """H f: multiplier -i sgn(k); the mean is annihilated."""
    c = -1j * f.coeffs
    c[0] = 0.0
    return f.replace(c)


def derivative(f):
    return f.replace(1j * _kvec(f) * f.coeffs)


def half_laplacian(f):
    """(-Delta)^{1/2} f: multiplier |k|, equal to H(f')."""
    return f.replace(_kvec(f) * f.coeffs)


def fejer(f, N):
    """Convolution with the order-N Fejer kernel, multiplier (1 - |k|/N)_+."""
    if N < 1:
        raise ValueError("Fejer order must be >= 1")
    k = _kvec(f)
    mult = np.clip(1.0 - k / N, 0.0, None)
    return f.replace(f.coeffs * mult, min(f.band_limit, N - 1))


# --------------------------------------------------------------------------
# principal-value quadrature oracles

_RULES = ("alternating", "punctured")


def _pv_apply(samples, kernel, difference, rule, block):
    M = samples.size
    d = np.arange(M)
    w = np.zeros(M)
    if rule == "alternating":
        # odd offsets only, doubled weight: exact for degree < M/2
        sel = d % 2 == 1
        scale = 2.0 * 2.0 / M
    elif rule == "punctured":
        sel = d != 0
        scale = 2.0 / M
    else:
        raise ValueError(f"unknown PV rule {rule!r}; expected one of {_RULES}")
    w[sel] = kernel(np.pi * d[sel] / M)
    out = np.empty(M)
    cols = np.arange(M)
    for start in range(0, M, block):
        rows = np.arange(start, min(start + block, M))
        W = w[(rows[:, None] - cols[None, :]) % M]
        # row-wise reductions: independent of the block partition
        if difference:
            out[rows] = (W * (samples[rows, None] - samples[None, :])).sum(axis=1)
        else:
            out[rows] = (W * samples[None, :]).sum(axis=1)
    return scale * out


def hilbert_oracle_pv(g, rule="alternating", block=256):
    """Direct PV quadrature of (1/pi) p.v. int g(y) / (2 tan((x-y)/2)) dy.

    ``rule="punctured"`` omits only the singular node (first-order
    accurate); ``"alternating"`` sums over nodes at odd offsets with
    doubled weight, which is exact for trig polynomials of degree < M/2.
    Row blocks are reduced in a fixed order, so results are reproducible.
    """
    samples = g.samples if isinstance(g, GridField) else np.asarray(g, dtype=float)
    return GridField(_pv_apply(samples, lambda h: 0.5 / np.tan(h), False, rule, block))


def half_laplacian_oracle_pv(g, rule="alternating", block=256):
    """Direct quadrature of (1/pi) int (g(x)-g(y)) / (4 sin^2((x-y)/2)) dy."""
    samples = g.samples if isinstance(g, GridField) else np.asarray(g, dtype=float)
    return GridField(_pv_apply(samples, lambda h: 0.25 / np.sin(h) ** 2, True, rule, block))


# --------------------------------------------------------------------------
# norms

def norm_lp(g, p):
    """(int_T |g|^p dx)^{1/p} by the periodic trapezoid rule; p=inf gives max|g|."""
    s = np.abs(g.samples if isinstance(g, GridField) else np.asarray(g, dtype=float))
    if np.isinf(p):
        return float(s.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    return float((TWO_PI / s.size * np.sum(s ** p)) ** (1.0 / p))


def norm_sobolev(f, s):
    """Homogeneous H^s seminorm in the integral convention (see module doc)."""
    c = f.coeffs
    if s < 0 and abs(c[0]) > 0:
        raise MeanZeroError("negative-order norms need a mean-zero field; "
                            "subtract the mean first (SpectralField.without_mean)")
    k = np.arange(1, c.size)
    return float(np.sqrt(TWO_PI * np.sum(k ** (2.0 * s) * 2.0 * np.abs(c[1:]) ** 2)))


def norm_wiener(f, m=0, nu=0.0):
    """sum_{k != 0} exp(nu |k|) |k|^m |c_k|, folding both signs of k."""
    c = f.coeffs
    k = np.arange(1, c.size)
    return float(np.sum(2.0 * np.exp(nu * k) * k ** m * np.abs(c[1:])))


def cotlar_residual(u, M=None):
    """Max residual of (Hu)^2 - u^2 + ubar^2 = 2 H(u Hu) on a grid.

    The mean-corrected form holds for any real u, so no mean subtraction is
    required.  M defaults to 4K+1 (the product u*Hu has degree 2K).
    """
    K = u.band_limit
    if M is None:
        M = max(4 * K + 1, 4)
    if M < 4 * K + 1:
        raise AliasingError(f"Cotlar check needs a grid of size >= {4 * K + 1}")
    Hu = hilbert(u)
    ug = to_grid(u, M).samples
    Hug = to_grid(Hu, M).samples
    prod = analyze(ug * Hug, 2 * K)
    rhs = 2.0 * to_grid(hilbert(prod), M).samples
    lhs = Hug ** 2 - ug ** 2 + u.mean ** 2
    return float(np.max(np.abs(lhs - rhs)))
