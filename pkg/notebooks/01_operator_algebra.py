# %% [markdown]
# # Operator algebra and the factorized evolution
#
# Operators are normal-ordered polynomials in q and p with exact Gaussian
# rational coefficients, graded by powers of beta, T, kappa and the inverse
# masses. The evolution operator of the coupled three-particle system splits
# into twelve exponentials; here we rebuild the nested brackets and check that
# the product of the factors reproduces the full exponential through T^6.

# %%
from akgup.factorization import splitting_commutators, check_factorization, factor_exponents
from akgup.operators import commutator, p, q

# %% [markdown]
# The canonical bracket in units with hbar = 1.

# %%
print(commutator(q(1), p(1)).to_text())

# %% [markdown]
# Nested brackets needed by the symmetric splittings. Each line of the text
# form is one monomial: coefficient, then the grading and the q, p powers.

# %%
for name, poly in splitting_commutators().items():
    print(name)
    print(poly.to_text() or "0\n")

# %% [markdown]
# The factor sequence, applied right to left.

# %%
seq = factor_exponents()
for label, x in seq:
    print(f"{label:>8}: {len(x)} terms")

# %% [markdown]
# Expanding every factor and the exact exponential to T^6 leaves no residual.

# %%
report = check_factorization(6)
print(report.summary())
