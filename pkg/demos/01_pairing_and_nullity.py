# coding: utf-8

# # Occupation correlations in paired and unpaired ground states
#
# Two eigenmodes are probed. A particle probe reads the occupation n_k of its
# mode, a hole probe reads 1 - n_k. The normalized correlator
# alpha = cov(m0, m1) / (<m0><m1>) vanishes for any Slater determinant and is
# the weight ratio of the two-state decomposition that fixes E1.

# In[1]:

import math

import numpy as np

from entanglab import (
    HOLE,
    PARTICLE,
    ProbeSpec,
    bcs_uv_oracle,
    build_model,
    e1_closed_form,
    ground_state,
    mode_occupation_correlator,
    single_particle_modes,
)
from entanglab.verify import fermi_sea_state, random_quadratic_model


# ## A single pair at the Fermi level
#
# With xi = 0 the ground state is (|00> - |11>)/sqrt(2): each mode is half
# filled and the two occupations are locked together.

# In[2]:

pair = build_model({"preset": "pairing_toy", "params": {"pairs": [(0.0, 1.0)]}})
g = ground_state(pair.hamiltonian, pair.basis()).state
r = mode_occupation_correlator(g, pair.modes, ProbeSpec(0, mode=0), ProbeSpec(0, mode=1))
print(f"<n0> = {r.mean0:.6f}  <n1> = {r.mean1:.6f}  <n0 n1> = {r.cross:.6f}")
print(f"alpha = {r.alpha:.15f}   E1 = {e1_closed_form(r.alpha):.15f}   ln 2 = {math.log(2):.15f}")


# ## Moving the pair away from the Fermi level
#
# alpha follows u^2/v^2 and E1 is symmetric under alpha -> 1/alpha.

# In[3]:

print(f"{'xi':>6} {'alpha (ED)':>14} {'u^2/v^2':>14} {'E1':>10}")
for xi in np.linspace(-1.5, 1.5, 7):
    m = build_model({"preset": "pairing_toy", "params": {"pairs": [(xi, 1.0)]}})
    g = ground_state(m.hamiltonian, m.basis()).state
    p0 = ProbeSpec(0, mode=m.modes.mode_on_site(0))
    p1 = ProbeSpec(0, mode=m.modes.mode_on_site(1))
    a = mode_occupation_correlator(g, m.modes, p0, p1).alpha
    print(f"{xi:6.2f} {a:14.8f} {bcs_uv_oracle(xi, 1.0)[2]:14.8f} {e1_closed_form(a):10.6f}")


# ## No pairing, no correlation
#
# A random number-conserving quadratic model has a Fock-word ground state in
# its eigenmode basis, so every covariance is zero up to round-off.

# In[4]:

rng = np.random.default_rng(0)
q = random_quadratic_model(rng, 8)
modes = single_particle_modes(q)
g = fermi_sea_state(q, modes)
cache = {}
worst = max(
    abs(mode_occupation_correlator(g, modes, ProbeSpec(0, HOLE, mode=i), ProbeSpec(0, PARTICLE, mode=j),
                                   strict=False, cache=cache).covariance)
    for i in range(8) for j in range(8) if i != j
)
print(f"largest |covariance| over all mode pairs: {worst:.2e}")
