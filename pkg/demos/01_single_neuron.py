# %% [markdown]
# # A single memristive neuron
#
# The state is a membrane variable ``x`` and a magnetic flux ``phi``.
# The flux acts on ``x`` through a cosine memductance, so ``k`` sets how
# strongly the memristor feeds back.

# %%
import numpy as np

from mrchialvo import DriveSignal, MapParams, NeuronState, firing_params, firing_stats, iterate, phl_trace

# %% [markdown]
# ## Memristor under a sinusoidal voltage
# Current vanishes whenever the voltage does, so the v-i curve is pinched at
# the origin. A larger amplitude opens the lobes.

# %%
mem = MapParams(k0=0.0, k1=0.7, k2=0.2, k=0.0, r=0.0)
for v_m in (0.6, 0.8, 1.0):
    tr = phl_trace(DriveSignal(v_m, 3.7, 2000), mem)
    pinched = np.all(tr.i[tr.v == 0.0] == 0.0)
    print(f"v_m={v_m:.1f}  lobe area={tr.enclosed_area:.4f}  pinched={pinched}")

# %% [markdown]
# ## Firing patterns
# The named recipes differ only in ``k`` and ``r``. At these exact values the
# spiking and phasic recipes settle onto a stable fixed point once the
# transient dies out, so their post-transient spike count is zero; the two
# bursting recipes keep firing.

# %%
for name in ("regular_spiking", "tonic_spiking", "phasic_bursting", "periodic_bursting", "chaotic_bursting"):
    p = firing_params(name)
    orbit = iterate(NeuronState(0.1, 0.0), p, 2000, 3000)
    stats = firing_stats(orbit)
    print(f"{name:18s} range={np.ptp(orbit.x):8.3g}  spikes={stats.spike_count:4d}  ISI cv={stats.isi_cv:.3f}")
