"""Two variations: the tilde lift with size-2 modes, and an order-3 base tensor."""
import numpy as np

from rankbridge import FieldSpec, PartialMatrix, build_tilde, to_affine_space, verify_theorem, verify_tilde
from rankbridge.exact import random_affine_space

GF2 = FieldSpec.gf(2)

# identity with its off-diagonal entries hidden: completes to the all-ones matrix
P = PartialMatrix((2, 2), {(1, 1): 1, (2, 2): 1}, [(1, 2), (2, 1)], GF2)
S = to_affine_space(P)
print("tilde shape:", build_tilde(S).tensor.shape)
rep = verify_tilde(S)
print(f"rank(A,U) = {rep.r}, rank(tilde) = {rep.l}, s = {rep.s}")

# an affine space of 2x2x2 tensors spanned by random pure tensors
rng = np.random.default_rng(3)
for _ in range(5):
    S3 = random_affine_space(rng, (2, 2, 2), GF2, 2)
    rep = verify_theorem(S3)
    print(f"order 3: rank(A,U) = {rep.r}, rank(hat) = {rep.l}, equal = {rep.equal}")
