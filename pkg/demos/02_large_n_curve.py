# %% [markdown]
# # Large-N limit: the genus-zero spectral curve
#
# For one-cut potentials the large-N spectral curve is rational.  The loop
# engine solves for its parametrization x(z), y(z), then derives the moments,
# the free energy derivatives and the first 1/N^2 correction of the
# resolvent.  Here the quartic model t = 0.025 is compared with exact
# finite-N moments along an N ladder.

# %%
import numpy as np

from bimatrix import loop
from bimatrix.biortho import build_family
from bimatrix.model import quartic_model
from bimatrix.operators import build_Q_P, trace_moments

model = quartic_model(0.025, 1)
curve = loop.solve_genus0_curve(model)
print("gamma:", curve.gamma, " branch points in x:", curve.x(curve.branch_points()))
print("cut:", loop.cut_endpoints(curve))

# %%
T0 = loop.leading_moments(curve, 4)
T1 = loop.resolvent_subleading(curve).moments(4)
print("leading moments T_k:", T0)
print("1/N^2 corrections:", np.real(T1))

# %% [markdown]
# The finite-N moments <tr M1^k>/N are exact functions of the recursion
# coefficients.  Fitting a + b/N^2 + c/N^4 through N = 8, 12, 16 recovers both
# the leading moment and the subleading coefficient.

# %%
Ns = np.array([8, 12, 16])
rows = np.array([trace_moments(build_Q_P(build_family(model.with_N(N), N + 16))[0], N, 4) / N
                 for N in Ns])
fit = np.linalg.solve(np.vstack([Ns ** 0.0, Ns ** -2.0, Ns ** -4.0]).T, rows)
for k in (2, 4):
    print(k, fit[0][k], T0[k], fit[1][k], np.real(T1[k]))

# %% [markdown]
# The mixed resolvent at finite N converges to the large-N formula as 1/N^2.

# %%
from bimatrix.group_integrals import mixed_resolvent_finite
from bimatrix.model import gaussian_model

g = loop.solve_genus0_curve(gaussian_model(1))
x, y = 3.0 + 0.5j, 2.5 - 0.3j
large = loop.mixed_resolvent_large_n(g, x, y)
for N in (4, 8, 16):
    Q, P = build_Q_P(build_family(gaussian_model(N), N + 24))
    print(N, abs(mixed_resolvent_finite(Q, P, N, x, y)["value"] - large))
