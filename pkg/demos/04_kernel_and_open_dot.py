# coding: utf-8

# # From a current cross-correlation spectrum to alpha
#
# A symmetrized spectrum S(w) is weighted by the kernel
# (exp(-i w tau) - exp(-gamma tau)) / (1 - exp(-gamma tau)) * gamma^2/(w^2 + gamma^2).
# A flat spectrum integrates to zero exactly.

# In[1]:

import tempfile
from pathlib import Path

import numpy as np

from entanglab import (
    KernelParams,
    QdFormulaInputs,
    alpha_from_spectrum,
    qd_entanglement_formula,
    read_spectrum_table,
    write_spectrum_table,
)


# In[2]:

gamma = 0.5
k = KernelParams(gamma)
omega = np.linspace(-1000 * gamma, 1000 * gamma, 200001)
for lam in (0.05, 0.25, 1.0, 5.0):
    S = 2 * lam / (omega**2 + lam**2)
    r = alpha_from_spectrum(omega, S, (1.0, 1.0), k)
    print(f"Lorentzian width {lam:5.2f}: alpha = {r.alpha: .8f}  (error estimate {r.error_estimate:.1e})")
flat = alpha_from_spectrum(omega, np.ones_like(omega), (1.0, 1.0), k)
print(f"flat spectrum: alpha = {flat.alpha:.1e}")


# ## Spectrum files
#
# Two columns, '#' comments, strictly increasing frequency.

# In[3]:

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "spectrum.txt"
    write_spectrum_table(path, omega, 2 * 0.25 / (omega**2 + 0.25**2), header="omega S(omega)")
    w, s = read_spectrum_table(path)
    print(f"read back {w.size} rows, alpha = {alpha_from_spectrum(w, s, (1.0, 1.0), k).alpha:.8f}")


# ## Open quantum dot with N channels
#
# The interaction contribution dominates while the mean level width is below
# (eps1 - eps0)/N. E1 falls with N and with the level separation.

# In[4]:

print(f"{'N':>4} {'E1':>12} {'valid':>6}")
for N in (1, 3, 10, 30, 100):
    r = qd_entanglement_formula(QdFormulaInputs(N, 0.01, 0.01, -0.5, 0.5))
    print(f"{N:4d} {r.entanglement:12.5e} {str(r.valid):>6}")
