# %% [markdown]
# # Asymptotics of the wave functions outside the cut
#
# Outside the eigenvalue support the wave functions psi_{N-k}(x) are
# predicted by the genus-zero curve alone: a Jacobian prefactor, a power
# (gamma z)^(-k) and the effective exponent exp(-N T(z)).  The relative error
# should decay like 1/N.

# %%
from bimatrix.asymptotics import asymptotic_data, asymptotic_error_sweep
from bimatrix.model import gaussian_model

data = asymptotic_data(gaussian_model(1))
print("mu =", data.mu, " probe spread:", data.mu_spread)

# %%
sweep = asymptotic_error_sweep(gaussian_model(1), [8, 12, 16], [2.5, 3.5], ks=(0, 1))
for r in sweep["rows"]:
    print(r["N"], r["k"], r["x"], f"{r['rel_err']:.3e}", f"{r['h_asym'] / r['h_exact']:.4f}")
print("fitted decay exponents:", sweep["exponent"])
