import itertools
from fractions import Fraction

import numpy as np
import pytest

from rankbridge import FieldSpec, PartialMatrix

GOLDEN = [[2, 3, 1], [2, 3, 1], [4, 6, 2]]
GOLDEN_LAMBDAS = [3, 1, 1, 4]


def worked_partial(field=None):
    field = field or FieldSpec.rational()
    return PartialMatrix.from_array([[2, None, None], [2, 3, None], [None, 6, 2]], field)


@pytest.fixture
def Q():
    return FieldSpec.rational()


@pytest.fixture
def GF2():
    return FieldSpec.gf(2)


@pytest.fixture
def GF3():
    return FieldSpec.gf(3)


@pytest.fixture
def worked():
    return worked_partial()


def _pure_tensors(shape, p):
    """Every nonzero pure tensor of ``shape`` over GF(p), as flat int tuples."""
    vecs = [[np.array(v) for v in itertools.product(range(p), repeat=m) if any(v)] for m in shape]
    out = set()
    for combo in itertools.product(*vecs):
        t = combo[0]
        for v in combo[1:]:
            t = np.multiply.outer(t, v)
        out.add(tuple((t % p).reshape(-1)))
    return [np.array(t) for t in sorted(out)]


_BFS_CACHE = {}


def bfs_rank_table(shape, p):
    """Exact rank of every tensor of ``shape`` over GF(p) by breadth-first sums of pure tensors.

    Independent of the package's search: no canonical forms, no pruning.
    """
    key = (tuple(shape), p)
    if key in _BFS_CACHE:
        return _BFS_CACHE[key]
    n = int(np.prod(shape))
    weights = p ** np.arange(n)[::-1]
    pures = np.array(_pure_tensors(shape, p))
    ranks = {0: 0}
    frontier = np.zeros((1, n), dtype=np.int64)
    depth = 0
    while frontier.size:
        depth += 1
        sums = (frontier[:, None, :] + pures[None, :, :]) % p
        sums = sums.reshape(-1, n)
        codes = sums @ weights
        codes, first = np.unique(codes, return_index=True)
        fresh = [i for i, c in zip(first, codes) if int(c) not in ranks]
        for i in fresh:
            ranks[int(sums[i] @ weights)] = depth
        frontier = sums[fresh]
    _BFS_CACHE[key] = (ranks, weights)
    return ranks, weights


def bfs_rank(T):
    """Rank of a GF(p) DenseTensor looked up in the BFS table."""
    ranks, weights = bfs_rank_table(T.shape, T.field.p)
    return ranks[int(T.entries.astype(np.int64) @ weights)]


def gf2_span_rank(M):
    """Rank over GF(2) as log2 of the size of the row space, by enumeration."""
    M = np.asarray(M, dtype=np.int64) % 2
    rows = M.shape[0]
    space = {tuple((np.array(c) @ M) % 2) for c in itertools.product(range(2), repeat=rows)}
    return int(round(np.log2(len(space))))
