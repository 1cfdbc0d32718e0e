# %% [markdown]
# # Plugging in a new objective
#
# The solver only needs a value and a Euclidean gradient. As an example we
# find the 2-d projection that keeps one class compact while spreading the
# whole dataset: minimize tr(M^T S_w M) - tr(M^T S_t M) over orthonormal M.

# %%
import numpy as np

from ldr import Objective, gen_gaussian_clusters, gradient_check, minimize, random_frame

data = gen_gaussian_clusters(6, 300, 3, seed=1)
X, z = data.X, data.labels
Xc = X[:, z == 0] - X[:, z == 0].mean(axis=1, keepdims=True)
A = Xc @ Xc.T / Xc.shape[1] - X @ X.T / X.shape[1]

f = Objective("compact_class",
              value=lambda M: float(np.sum(M * (A @ M))),
              grad=lambda M: 2 * A @ M)

# %% [markdown]
# Check the gradient numerically before trusting it.

# %%
M0 = random_frame(6, 2, 0)
print("gradient check:", gradient_check(f, M0))

# %%
rep = minimize(f, M0)
print(rep.status, rep.iterations, rep.f_final)
# this objective is a trace, so the answer is the bottom eigenvectors of A
print("eigen answer:", np.sum(np.linalg.eigvalsh(A)[:2]))
