"""
Long-time behavior: exponential relaxation to the constant f_inf.

||1/f||_1 is conserved, so the only possible end state is the constant
f_inf = 2 pi / ||1/f0||_1.  Near it the equation linearizes to
f_t = -f_inf Lambda f, so the slowest mode |c_1| should decay at exactly
rate f_inf.  For small data the solution also becomes analytic: its
Wiener norm with weight e^{nu(t)|k|}, nu(t) ~ f_inf t, stays bounded.
"""
import numpy as np

from tpeskin import diagnostics as dg
from tpeskin.dynamics import RunConfig, simulate

for name, init, K in (("1 + 0.6 cos x", {"preset": "cosine", "amp": 0.6}, 32),
                      ("random K=16", {"preset": "random", "K": 16, "seed": 7}, 16)):
    tr = simulate(RunConfig(initial=init, K=K, t_end=20.0, record_dt=0.05, dt_max=0.01, cfl=0.1))
    rep = dg.check_decay_to_equilibrium(tr)
    print(f"{name:>14}: {rep.note}, relative error {rep.worst:.1e}")

tr = simulate(RunConfig(initial={"preset": "cosine", "a": 0.8, "amp": 0.02}, K=8, t_end=10.0, record_dt=0.5))
f_inf = 2 * np.pi / tr.records[0].norm_L1_F
print(f"\nsmall data 0.8 + 0.02 cos x, f_inf = {f_inf:.6f}")
print("   t    nu(t)     ||f||_{F^{0,1}}    ||f||_{F^{0,1}_nu}")
for r in tr.records[::4]:
    print(f"{r.t:4.1f}  {float(dg.nu_conservative(r.t, f_inf)):6.3f}   {r.wiener01:.3e}        {r.wiener01_nu:.3e}")
print(dg.check_analyticity(tr).line())
