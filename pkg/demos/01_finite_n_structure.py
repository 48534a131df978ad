# %% [markdown]
# # Finite-N structure of the Gaussian two-matrix model
#
# The Gaussian model with V1(x) = V2(y) = x^2 has an explicit answer for
# almost everything: its biorthogonal polynomials are rescaled Hermite
# polynomials, the recursion operators are tridiagonal, and the spectral
# density is a semicircle of squared radius 8/3 at large N.  This walk-through
# builds those objects numerically and checks them against the closed forms.

# %%
import numpy as np

from bimatrix.biortho import build_family, heine_check
from bimatrix.kernels import one_point_density
from bimatrix.model import gaussian_model, quartic_model
from bimatrix.operators import (build_Q_P, heisenberg_residual, string_equation_residual,
                                trace_moments)

N = 4
model = gaussian_model(N)
fam = build_family(model, 24)
print("orthogonality residual:", fam.residual)

# %% [markdown]
# The norm ratios h_{n+1}/h_n equal (n+1)/(3N) in this model.

# %%
ratios = fam.h[1:8] / fam.h[:7]
print(np.allclose(ratios, (np.arange(1, 8)) / (3 * N)))

# %% [markdown]
# The multiplication operators Q and P satisfy the string equation and the
# Heisenberg relation [P^t, Q] = (T/N) Id on their interior windows.

# %%
Q, P = build_Q_P(fam)
print("string equation:", string_equation_residual(Q, P, model)["max"])
print("Heisenberg:", heisenberg_residual(Q, P, model)["max"])
print("<tr M1^4>/N =", trace_moments(Q, N, 4)[4] / N, "exact:", 8 / 9 + (4 / 9) / N ** 2)

# %% [markdown]
# The generalized Heine formula expresses pi_n as an eigenvalue integral.
# The quartic deformation is checked the same way.

# %%
for m in (gaussian_model(2), quartic_model(0.05, 2)):
    f = build_family(m, 12)
    print(m.v1.coeffs, [heine_check(f, n, [-1.0, 0.0, 0.5, 1.2, 2.0]) for n in (1, 2)])

# %% [markdown]
# The one-point density from the kernel approaches the semicircle as N grows.

# %%
xs = np.linspace(-1.5, 1.5, 7)
semicircle = 3 / (4 * np.pi) * np.sqrt(8 / 3 - xs ** 2)
for n in (2, 8, 16):
    d = one_point_density(build_family(gaussian_model(n), n + 16), xs)
    print(n, np.max(np.abs(d - semicircle)))
