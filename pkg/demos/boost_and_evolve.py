"""Boost a standing wave and evolve it in time.

    python demos/boost_and_evolve.py

Samples the v = 0.9 boost of the sigma=300 type-gamma soliton, measures
the Lorentz contraction and drift, then runs 20 periods of the radial wave
equation with a 1% bump and reports the conservation ledger.
"""

from qball.boost import barycenter, half_max_widths, make_boost, sample_boosted
from qball.evolve import stability_run
from qball.flow import FlowConfig, minimize
from qball.grid import make_grid
from qball.potentials import builtin_potential

p = builtin_potential("gamma")
sol = minimize(FlowConfig(), p, 300.0, make_grid(2, 40, 2000))

b = make_boost((0.9, 0.0), sol.omega)
f0 = sample_boosted(sol.profile, b, 0.0, (20, 16), 0.05)
f1 = sample_boosted(sol.profile, b, 5.0, (20, 16), 0.05)
w1, w2 = half_max_widths(f0)
print(f"gamma = {b.gamma:.4f}, width ratio = {w2 / w1:.4f}")
print(f"drift velocity = {(barycenter(f1) - barycenter(f0)) / 5.0}")

rep = stability_run(sol, None, p, perturbation_amp=0.01, periods=20)
print(f"max modulus deviation {rep.max_modulus_deviation:.4f}")
print(f"E drift {rep.E_drift:.2e}, H drift {rep.H_drift:.2e}")
for t, R in rep.localization_radius_series[::5]:
    print(f"  t = {t:8.2f}  R = {R:.3f}")
