# %% [markdown]
# # Independent oracles
#
# Two references that share no algebra with the closed forms:
#
# * the momentum-space triple integral of the kernel, damped by
#   exp(-eps |p|^2) and extrapolated to eps = 0;
# * grid evolution by a second-order split of the Hamiltonian, compared with
#   the factorized unitary.

# %%
import numpy as np

from akgup.coefficients import derive_coefficients
from akgup.dynamics import InitialState
from akgup.oracle.grid import GridSpec, apply_factorized_unitary, trotter_convergence
from akgup.oracle.quadrature import quad_kernel
from akgup.params import SystemParams
from akgup.propagator import PropagatorPoint, k_gup

prm = SystemParams(1.3, 0.8, 1.7, kappa=0.9, beta=1e-5, T=0.7)
pt = PropagatorPoint((0.3, -0.2, 0.5), (0.1, 0.4, -0.3))

# %%
res = quad_kernel(prm, pt)
closed = k_gup(prm, pt, derive_coefficients(prm)).total
print("eps used  ", res.details["eps"])
print("quadrature", res.value, "+-", res.error)
print("closed    ", closed)
print("rel. diff ", abs(res.value - closed) / abs(closed))

# %% [markdown]
# The split evolution converges to the factorized unitary at second order.

# %%
spec = GridSpec(64, 9.0)
dyn = SystemParams(1.0, 2.0, 1.0, kappa=0.8, beta=1e-5, T=0.5)
state = InitialState.product().on_grid(spec)
report = trotter_convergence(state, dyn, (50, 100, 200))
for s, e in zip(report.steps, report.errors):
    print(f"{s:5d} {e:.3e}")
print("order", report.order)
