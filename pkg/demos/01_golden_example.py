"""A 3x3 rational matrix with four missing entries can be completed to rank one.

We lift the partial matrix to the hat tensor, push a rank-one completion
through it as a 5-term decomposition, then pull the completion back out.
"""
from rankbridge import (
    PartialMatrix,
    FieldSpec,
    build_hat,
    embed_completion,
    expand,
    extract_completion,
    rank_one_completion,
    to_affine_space,
)

Q = FieldSpec.rational()
P = PartialMatrix.from_array([[2, None, None], [2, 3, None], [None, 6, 2]], Q)
S = to_affine_space(P)
def show(T):
    return [[str(v) for v in row] for row in T.tolist()]


print(f"{P.s} unknown entries at {P.unknowns}")

res = rank_one_completion(P)
print("rank-one completion exists:", res.completion is not None, "| unique:", res.unique)
print(show(res.completion.matrix))

hat = build_hat(S)
print("hat tensor shape:", hat.tensor.shape)

dec = embed_completion(S, res.completion, res.completion.decomposition)
print(f"embedded decomposition has {len(dec)} terms = rank 1 + s = {1 + S.s}")
assert expand(dec) == hat.tensor

back = extract_completion(S, dec)
print("extracted lambdas:", [str(x) for x in back.lambdas])
print("extracted matrix :", show(back.matrix))
