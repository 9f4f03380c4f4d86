# %% [markdown]
# # Pointer variances at the measurement time
#
# Probe and system start in minimum-uncertainty Gaussians. After the
# interaction time T = 1/kappa the pointer positions carry information on the
# position and momentum of the system; their spreads obey dx1 dx2 >= 1.

# %%
import numpy as np

from akgup.dynamics import InitialState, ak_product, beta_sweep, sweep_csv, sweep_slopes
from akgup.oracle.grid import GridSpec
from akgup.params import SystemParams

params = SystemParams(1.0, 2.0, 1.0, kappa=1.0, T=1.0)
initial = InitialState.product()

# %%
rep = ak_product(initial, params, cross_check=True)
print(rep.to_json())

# %% [markdown]
# The beta dependence is reported as a finite-difference sensitivity.

# %%
reports = beta_sweep(initial, params, betas=(0.0, 1e-6, 1e-5))
print(sweep_csv(reports))
print(sweep_slopes(reports))

# %% [markdown]
# Correlating the two pointers changes the variances at the measurement time.
# Correlation widens the momentum distribution, so the grid is widened too.

# %%
wide = GridSpec(128, 12.0)
for rho in (-0.5, 0.0, 0.5):
    r = ak_product(InitialState.entangled(rho), params, wide)
    print(rho, r.var_x1, r.var_x2, r.product)
