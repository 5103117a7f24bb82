# coding: utf-8

# # Energy-filtered probes on a proximity-coupled chain
#
# A normal segment (sites 0..4) is tunnel-coupled to a paired segment
# (sites 5..9). Both probes touch site 0. Probe 0 extracts an electron at a
# strong single-particle removal line; probe 1 is swept. The correlator
# peaks when the two energies mirror each other, eps1 = -eps0.

# In[1]:

import time

import numpy as np

from entanglab import ProbeSpec, build_model, c, filtered_correlator, low_spectrum, materialize


# In[2]:

t0 = time.perf_counter()
model = build_model({"preset": "proximity_chain",
                     "params": {"M_normal": 5, "M_sc": 5, "t": 1.0, "Delta": 0.5, "T_tunnel": 0.3}})
spec = low_spectrum(model.hamiltonian, model.basis())
print(f"{len(spec)} levels in {time.perf_counter() - t0:.1f}s, ground energy {spec.eigenvalues[0]:.6f}")


# ## Where can probe 0 extract?
#
# Weights |<m|c_0|g>|^2 against excitation energy E_m - E_g.

# In[3]:

T = materialize(c(0), spec.basis, check_hermitian=False)
w = np.abs(spec.vectors.conj().T @ (T @ spec.vectors[:, 0])) ** 2
dE = spec.eigenvalues - spec.eigenvalues[0]
for i in np.argsort(-w)[:5]:
    print(f"  dE = {dE[i]:.4f}   weight = {w[i]:.4f}")


# ## Sweep probe 1

# In[4]:

eps0 = -0.943
grid = np.round(np.arange(0.05, 2.4501, 0.05), 10)
alpha = np.array([filtered_correlator(spec, ProbeSpec(eps0, width=0.05, site=0),
                                      ProbeSpec(e1, width=0.05, site=0)).alpha for e1 in grid])
for e1, a in zip(grid, alpha):
    bar = "#" * int(40 * abs(a) / np.abs(alpha).max())
    print(f"{e1:5.2f} {a:12.5e} {bar}")
print(f"peak at eps1 = {grid[np.argmax(np.abs(alpha))]:.2f}, -eps0 = {-eps0}")
