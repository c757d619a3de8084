"""Check rank(hat) = rank(A, U) + s on every 2x2 partial matrix over GF(2).

Both sides are computed exactly: the left by certified tensor-rank search,
the right by enumerating all completions.
"""
import collections
import time

from rankbridge import to_affine_space, verify_theorem
from rankbridge.exact import exhaustive_partial_matrices

t0 = time.perf_counter()
table = collections.Counter()
for P in exhaustive_partial_matrices(2, 2, 2):
    rep = verify_theorem(to_affine_space(P))
    assert rep.equal, rep.as_dict()
    table[(rep.s, rep.r, rep.l)] += 1

print(" s  r  rank(hat)  count")
for (s, r, l), n in sorted(table.items()):
    print(f"{s:2d} {r:2d} {l:10d} {n:6d}")
print(f"{sum(table.values())} instances, all equal, {time.perf_counter() - t0:.2f}s")
