"""
The string itself.

f is the stretch |X'| of an elastic string lying along a line in Stokes
flow.  Material points move with velocity -Hf, so a string configuration
X0(s) evolves as X(s, t) = Psi_t(X0(s)) where Psi_t is the flow map.  Its
divided differences must reproduce f, and it must straighten out into the
uniformly stretched string X = f_inf s.
"""
import os

import numpy as np

from tpeskin import io
from tpeskin import lagrangian as lg
from tpeskin import torus
from tpeskin.dynamics import RunConfig, simulate

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

n = 1024
s = -np.pi + 2 * np.pi * np.arange(n) / n
X0 = lg.StringConfig(s, s + 0.3 * np.sin(s))
f0 = lg.f0_from_configuration(X0, 1024)
print(f"stretch of the sine string: min {f0.samples.min():.3f}, max {f0.samples.max():.3f}")

tr = simulate(RunConfig(K=32, t_end=8.0, record_dt=0.5, snapshot_dt=0.1, cfl=0.5), initial=torus.analyze(f0, 32))
flow = lg.advect_flow(tr, X0.X)
configs = lg.reconstruct_X(flow, X0)

print("\n  t    oscillation of X - s    ||X'||^2    ||f||_1")
for t, X, r in zip(flow.times, configs, tr.records):
    print(f"{t:4.1f}   {lg.string_oscillation(X, 1.0):.3e}            {X.h1_norm() ** 2:.6f}    {r.norm_L1_f:.6f}")

print()
print(lg.check_stretch_consistency(configs, flow, tr).line())
print(lg.check_string_h1(configs, flow).line())

series = {f"t={t:g}": (X.s, X.X - X.s) for t, X in zip(flow.times, configs) if t in (0.0, 1.0, 2.0, 4.0)}
io.render_svg(series, os.path.join(OUT, "05_string.svg"), title="X(s, t) - s")
print(f"\nplot written to {OUT}/05_string.svg")
