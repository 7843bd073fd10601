# %% [markdown]
# Mirror displacement versus control power
#
# The equal-detuning steady states are the real roots of a quintic in x1.
# Without tunnelling the curve is a single S with one bistable window.
# Tunnelling adds a second fold pair over a narrow power range.

# %%
import numpy as np

from omsim import multistability as ms
from omsim.params import reference_params

p = reference_params(pc_w=0.03)
print(f"Omega_m / 2pi = {p.Omega_m / 2 / np.pi / 1e6:.1f} MHz, Delta1 = -Omega_m")

# %% root counts along a 0-50 mW sweep
for g in (0.0, 0.1, 0.2):
    sets = ms.sweep_branches(p.replace(g=g * p.Omega_m), "Pc", 0.0, 0.05, 500)
    for count in (3, 5):
        for lo, hi in ms.multi_root_intervals(sets, count):
            print(f"g = {g:.1f} Omega_m: {count} roots for P_c in "
                  f"[{1e3 * lo:.2f}, {1e3 * hi:.2f}] mW")

# %% branch stability on the S curve
bs = ms.branches(p.replace(Pc=8e-3))
for r in bs.roots:
    print(f"x1 = {r.x1:.3e} m  {r.stability}  max Re(lambda) = {r.eigen_max_real:.2e} 1/s")

# %% the same roots from the equal-detuning fixed points
states = ms.equal_detuning_states(p.replace(Pc=8e-3))
print("photon numbers n_a:", ", ".join(f"{s.n_a:.3e}" for s in states))
