# %% [markdown]
# Effective mirror masses
#
# Linearising the static force balance gives effective masses M' and M''
# for the two mirrors. A closed form is checked against a direct
# finite-difference evaluation of the same balance.

# %%
import numpy as np

from omsim import effective_mass as em
from omsim import figures
from omsim.errors import PoleEncountered

p = figures.PRESETS["2b"].params  # g = 0.1 Omega_m, 30 mW

# %% M'' across the Delta2 sweep
for d in np.linspace(-1, 1, 9):
    q = p.replace(Delta2=d * p.Omega_m)
    try:
        mp, mpp = em.closed_form_masses(q)
    except PoleEncountered as exc:
        print(f"Delta2 = {d:+.2f} Omega_m: pole in {exc.name}")
        continue
    orc = em.oracle_masses(q)[1]
    print(f"Delta2 = {d:+.2f} Omega_m: M'' = {mpp / em.KG_PER_NG:8.3f} ng "
          f"(direct {orc / em.KG_PER_NG:8.3f} ng), M' = {mp:.1e} kg")

# %% tunnelling moves the plateau
for g in (0.1, 0.3, 0.5):
    mpp = em.closed_form_masses(p.replace(g=g * p.Omega_m, Delta2=0.8 * p.Omega_m))[1]
    print(f"g = {g:.1f} Omega_m: M''(0.8 Omega_m) = {mpp / em.KG_PER_NG:.3f} ng")
