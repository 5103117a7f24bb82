# coding: utf-8

# # Explicit probe levels
#
# Here the probes are extra fermionic levels d_j at energy eps_j, hybridized
# with the system by v'. alpha comes from the d-level occupations of the
# enlarged ground state, recomputed at v', v'/2, v'/4 and extrapolated.

# In[1]:

import math

from entanglab import HOLE, PARTICLE, bcs_uv_oracle, probe_level_correlator, quadratic_probe_level_oracle


def coupled(inner, probes):
    return {"preset": "probe_coupled", "params": {"inner": inner, "probes": probes}}


# ## Paired inner system
#
# For one pair with both levels at +eps the result is
# (u^2/v^2) ((eps + E)/eps)^2 with E = sqrt(xi^2 + Delta^2). Far-detuned
# levels recover the mode-occupation value u^2/v^2.

# In[2]:

xi, delta = 0.5, 1.0
E = math.hypot(xi, delta)
u2, v2, ratio = bcs_uv_oracle(xi, delta)
inner = {"preset": "pairing_toy", "params": {"pairs": [(xi, delta)]}}
for eps in (0.5, 1.0, 5.0, 200 * E):
    r = probe_level_correlator(coupled(inner, [(eps, 0.02, 0), (eps, 0.02, 1)]))
    print(f"eps = {eps:8.2f}  alpha = {r.alpha:10.5f}  closed form = {ratio * ((eps + E) / eps) ** 2:10.5f}"
          f"  [{r.status}]  successive alphas {[round(a, 6) for a in r.diagnostics['alphas']]}")
print(f"mode-occupation value u^2/v^2 = {ratio:.5f}")


# ## Free inner chain
#
# Without interactions the d-level occupations still correlate through the
# single-particle projector P: cov = -|P_ab|^2 for two particle levels.

# In[3]:

free = {"preset": "free_chain", "params": {"M": 4, "t": 1.0}}
r = probe_level_correlator(coupled(free, [(0.7, 0.02, 0), (1.3, 0.02, 3)]))
oracle = quadratic_probe_level_oracle(coupled(free, [(0.7, 0.005, 0), (1.3, 0.005, 3)]))
print(f"free chain: alpha = {r.alpha:.6f}, projector value = {oracle:.6f}")
r = probe_level_correlator(coupled(free, [(-0.7, 0.02, 0), (0.7, 0.02, 0)]), (HOLE, PARTICLE))
print(f"mirrored hole/particle levels on one site: alpha = {r.alpha:.2e}")
