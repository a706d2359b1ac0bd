import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from tpeskin.torus import SpectralField

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def random_field(rng, K, capacity=None, mean=1.0, amp=0.3, zero_mean=False):
    """Band-limited field with decaying random modes; positive when amp is small."""
    k = np.arange(1, K + 1)
    c = np.zeros(K + 1, dtype=complex)
    c[1:] = (rng.standard_normal(K) + 1j * rng.standard_normal(K)) / k
    total = 2.0 * np.abs(c[1:]).sum()
    if total > 0:
        c[1:] *= amp / total
    c[0] = 0.0 if zero_mean else mean
    return SpectralField.from_coeffs(c, capacity if capacity is not None else K, K)


@st.composite
def band_limited(draw, max_K=16, zero_mean=False):
    K = draw(st.integers(min_value=1, max_value=max_K))
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    amp = draw(st.floats(min_value=0.05, max_value=2.0))
    return random_field(np.random.default_rng(seed), K, amp=amp, zero_mean=zero_mean)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = pytest.StashKey()


@pytest.fixture
def acceptance(request):
    """Record one summary line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, {})

    def log(n, title, ok, detail):
        lines[n] = f"AC{n:02d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        return ok

    return log


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
