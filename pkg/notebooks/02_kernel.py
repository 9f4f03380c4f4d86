# %% [markdown]
# # The O(beta) kernel
#
# The kernel is the Gaussian base kernel times a polynomial correction in the
# separations z = Q - q. The correction coefficients are polynomials in Q3,
# derived from Gaussian moments of the beta bracket.

# %%
import numpy as np

from akgup.coefficients import compare_with_quoted, derive_coefficients, kernel_table
from akgup.params import SystemParams
from akgup.propagator import PropagatorPoint, k_ak, k_free_gup, k_gup

prm = SystemParams(1.3, 0.8, 1.7, kappa=0.9, beta=1e-4, T=0.7)
pt = PropagatorPoint((0.3, -0.2, 0.5), (0.1, 0.4, -0.3))

# %% [markdown]
# Derived coefficients against the closed forms that have been quoted for
# a few indices; the merged table marks which entries came from where.

# %%
table = derive_coefficients(prm)
print(max(compare_with_quoted(table).values()))
merged = kernel_table(prm)
print({k: v for k, v in merged.provenance.items() if v == "paper-given"})

# %%
val = k_gup(prm, pt, merged)
print("base      ", val.base)
print("correction", val.correction)
print("AK kernel ", k_ak(prm.replace(beta=0.0), pt))

# %% [markdown]
# Without coupling the kernel is a product of three free GUP kernels.

# %%
free = prm.replace(kappa=0.0)
print(k_gup(free, pt, derive_coefficients(free)).total, k_free_gup(free, pt))

# %% [markdown]
# The correction is linear in beta, so the relative change of the kernel over
# beta is flat.

# %%
for beta in (1e-3, 1e-4, 1e-5):
    c = k_gup(prm.replace(beta=beta), pt, table).correction
    print(beta, (c - 1) / beta)
