# %% [markdown]
# # Unconstrained models: PPCA, factor analysis, regression
#
# Some methods optimize over all d x r matrices rather than orthonormal
# frames. The same descent loop handles them with an identity projection.

# %%
import numpy as np

from ldr import (RegressionSplit, center, fa_fit, linreg_embedding, linreg_fit, minimize,
                 ppca_closed_form, ppca_nll)

rng = np.random.default_rng(0)
W = rng.standard_normal((8, 2))
X = center(W @ rng.standard_normal((2, 2000)) + 0.3 * rng.standard_normal((8, 2000)))

# %% [markdown]
# PPCA has a closed form; the gradient descent path reaches the same likelihood.

# %%
M_star, s2 = ppca_closed_form(X, 2)
f = ppca_nll(X, s2)
rep = minimize(f, 0.1 * rng.standard_normal((8, 2)))
print(f"closed form {f(M_star):.6f}  descent {rep.f_final:.6f}  noise variance {s2:.4f}")

# %% [markdown]
# Factor analysis lets each coordinate have its own noise level.

# %%
model = fa_fit(X, 2)
print("EM iterations:", len(model.nll_trace) - 1, " noise:", np.round(model.noise, 3))

# %% [markdown]
# Regressing the last 6 coordinates on the first 2 gives a rank-2 projection.

# %%
split = RegressionSplit.from_data(X, 2)
M = linreg_fit(split)
P = linreg_embedding(M)
print("projection shape:", P.shape, " rank:", np.linalg.matrix_rank(P))
