# %% [markdown]
# Probe response and Fano lineshapes
#
# A weak probe sees the mechanically dressed cavity pair. Without tunnelling
# nothing reaches the far port. With tunnelling the forward transmission
# shows an asymmetric dip near the mechanical frequency.

# %%
import numpy as np

from omsim import figures

for fid in ("5a", "5b", "5c"):
    res = figures.run_figure(fid)
    g = res.preset.params.g / res.preset.params.Omega_m
    print(f"{fid}: g = {g:.1f} Omega_m")
    for f in res.features:
        print(f"  {f.name}: {f.status} ({f.detail})")

# %% the lineshape near Omega_m
res = figures.run_figure("5b")
x = np.array(res.column("omega_over_omega_m"))
tf = np.array(res.column("t_f"))
m = figures.fano_metrics(x, tf)
print(f"T_f max {m['max']:.3f}, min {m['min']:.3f} at {m['omega_at_min']:.4f} Omega_m")

# %% write CSV, JSON and a two-column plot file
out = figures.write_figure(res, "out")
print("wrote", out)
