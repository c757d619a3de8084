"""Completing over the reals with CP-ALS instead of an exact search.

ALS fits the hat tensor at increasing rank until the residual drops below
the tolerance; extraction then recovers the completion numerically.
"""
import numpy as np

from rankbridge import FieldSpec, PartialMatrix, build_hat, to_affine_space
from rankbridge.als import AlsConfig, complete_via_tensor, rank_sweep

R = FieldSpec.real(1e-9)
P = PartialMatrix.from_array([[2, None, None], [2, 3, None], [None, 6, 2]], R)

r_est, fit = rank_sweep(build_hat(to_affine_space(P)).tensor, AlsConfig(seed=0))
print(f"ALS rank estimate of the hat tensor: {r_est} (residual {fit.residual:.1e})")

C = complete_via_tensor(P, AlsConfig(seed=0))
np.set_printoptions(precision=10, suppress=True)
print(C.matrix.data)
sv = np.linalg.svd(C.matrix.data, compute_uv=False)
print("singular values:", sv)

# a random rank-one 5x5 matrix with 8 hidden entries
rng = np.random.default_rng(1)
M = np.outer(rng.uniform(0.5, 2, 5), rng.uniform(0.5, 2, 5))
cells = [(i, j) for i in range(1, 6) for j in range(1, 6)]
hidden = [cells[k] for k in sorted(rng.choice(25, size=8, replace=False))]
known = {c: M[c[0] - 1, c[1] - 1] for c in cells if c not in hidden}
C = complete_via_tensor(PartialMatrix((5, 5), known, hidden, R), AlsConfig(seed=1))
print(f"5x5 recovery: rank {C.achieved_rank}, max error {np.max(np.abs(C.matrix.data - M)):.1e}")
