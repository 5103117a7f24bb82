# coding: utf-8

# # Minimal-entropy decompositions
#
# A state functional is a vector of expectation values (1, <A_1>, ...). Its
# entanglement relative to a set of designated pure functionals is the
# smallest Shannon entropy of any convex decomposition into them.

# In[1]:

import numpy as np

from entanglab import ConeSpec, StateFunctional, e1_closed_form, entanglement_general, grid_search_minimum


# ## Three pure states on a line
#
# Target (1, 0.5) over {(1, 0), (1, 1), (1, 2)}: the outer pair wins.

# In[2]:

cone = ConeSpec(tuple(StateFunctional([1.0, x]) for x in (0.0, 1.0, 2.0)))
rep = entanglement_general(StateFunctional([1.0, 0.5]), cone)
print(f"support {rep.support}, weights {np.round(rep.weights, 6)}, E = {rep.entanglement:.7f}")
for s, support, p in rep.candidates:
    print(f"  vertex {support}: entropy {s:.7f}")


# ## The two-state case is the closed form

# In[3]:

for a in (0.1, 1.0, 10.0):
    lam0, lam1, lam_g = StateFunctional([1, 1 + a]), StateFunctional([1, 0.0]), StateFunctional([1, 1.0])
    e = entanglement_general(lam_g, ConeSpec((lam0, lam1))).entanglement
    print(f"alpha = {a:5.1f}: solver {e:.12f}, closed form {e1_closed_form(a):.12f}")


# ## A grid search never beats the vertices

# In[4]:

rng = np.random.default_rng(1)
pure = [StateFunctional(np.r_[1.0, rng.uniform(-1, 1, 2)]) for _ in range(5)]
target = StateFunctional(np.column_stack([p.values for p in pure]) @ rng.dirichlet(np.ones(5)))
cone = ConeSpec(tuple(pure))
print(f"vertices: {entanglement_general(target, cone).entanglement:.8f}")
print(f"grid    : {grid_search_minimum(target, cone, step=1e-3):.8f}")
