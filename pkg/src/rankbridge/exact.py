"""Ground-truth solvers over prime fields, plus the rank-one decision over any exact field.

Tensor rank is found by iterative deepening on ``r``. Pick a "coefficient"
mode ``k``; let ``W`` be the span of the mode-``k`` slices of ``T``. Then
``rank(T) <= r`` exactly when ``W`` sits inside the span of ``r`` pure
tensors on the remaining modes. The search therefore walks through
``r``-subsets of the canonical pure tensors on those modes (each factor
normalized so its first nonzero entry is 1, subsets in increasing
lexicographic order) and solves for the mode-``k`` factors at the leaves.

Pruning uses the residual unfolding rank: with ``S`` the span of the
chosen terms, ``dim(S + W) - dim(S)`` is the mode-``k`` unfolding rank of
``T`` modulo ``S`` and must not exceed the number of terms still to pick.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field as dc_field
from math import prod

import numpy as np

from . import linalg
from .completion import (
    AffineTensorSpace,
    Completion,
    PartialMatrix,
    apply_completion,
    membership,
    to_affine_space,
)
from .errors import BudgetExceeded, ExceedsMax, ValidationError
from .fields import FieldSpec
from .reduction import build_hat, build_tilde, extract_completion
from .tensor import (
    CPDecomposition,
    DenseTensor,
    PureTensor,
    expand,
    flatten,
    flattening_ranks,
    matrix_rank,
)

DEFAULT_MAX_NODES = 10**8
DEFAULT_MAX_ENUMERATION = 2**20
DEFAULT_MAX_CANDIDATES = 10**6


def budget_from_env(default: int = DEFAULT_MAX_NODES) -> int:
    value = os.environ.get("RANKBRIDGE_BUDGET_NODES")
    return int(value) if value else default


@dataclass
class SearchBudget:
    """Hard limits for the exact solvers. Exceeding one raises :class:`BudgetExceeded`."""

    max_nodes: int = DEFAULT_MAX_NODES
    max_enumeration: int = DEFAULT_MAX_ENUMERATION
    max_candidates: int = DEFAULT_MAX_CANDIDATES
    max_rank_slack: int | None = None


@dataclass
class SearchStats:
    nodes: int = 0
    prunes: int = 0

    def merge(self, other: "SearchStats"):
        self.nodes += other.nodes
        self.prunes += other.prunes


@dataclass(eq=False)
class RankCertificate:
    """A certified tensor rank: a decomposition of that length and an exhausted search below it."""

    rank: int
    decomposition: CPDecomposition
    lower_bound: int
    stats: SearchStats = dc_field(default_factory=SearchStats)


def _require_prime(field: FieldSpec, what: str):
    if not field.is_prime:
        raise ValidationError(f"{what} needs a prime field, got {field}")


def projective_points(m: int, p: int) -> list:
    """Nonzero vectors of GF(p)^m whose first nonzero entry is 1, in lexicographic order."""
    out = []
    for lead in range(m):
        for tail in itertools.product(range(p), repeat=m - lead - 1):
            out.append((0,) * lead + (1,) + tail)
    out.sort()
    return out


def _choose_mode(T: DenseTensor, ranks) -> int:
    p = T.field.p
    counts = []
    for k in range(T.order):
        n = 1
        for i, m in enumerate(T.shape):
            if i != k:
                n *= (p**m - 1) // (p - 1)
        counts.append((n, -ranks[k], k))
    return min(counts)[2]


def generic_rank_bound(shape) -> int:
    """A rank every tensor of this shape is guaranteed not to exceed (product of all but the largest dimension)."""
    if len(shape) <= 1:
        return 1
    dims = sorted(shape)
    return prod(dims[:-1])


def tensor_rank(
    T: DenseTensor,
    max_rank: int | None = None,
    budget: SearchBudget | None = None,
    mode: int | None = None,
) -> RankCertificate:
    """Certified rank of ``T`` over its prime field.

    Raises :class:`ExceedsMax` when no decomposition with at most
    ``max_rank`` terms exists, and :class:`BudgetExceeded` when the search
    would visit more than ``budget.max_nodes`` nodes. ``mode`` (1-based)
    forces the coefficient mode; by default the mode with the fewest
    candidate pure tensors on its complement is used.
    """
    field = T.field
    _require_prime(field, "tensor_rank")
    budget = budget or SearchBudget()
    p = field.p
    ranks = flattening_ranks(T)
    lower = max(ranks)
    if max_rank is None:
        max_rank = generic_rank_bound(T.shape)
    stats = SearchStats()
    if T.is_zero():
        return RankCertificate(0, CPDecomposition(T.shape, field, []), 0, stats)
    if lower > max_rank:
        raise ExceedsMax(f"unfolding rank {lower} already exceeds max_rank={max_rank}", max_rank, stats)

    k = mode - 1 if mode is not None else _choose_mode(T, ranks)
    others = [i for i in range(T.order) if i != k]
    n_cand = 1
    for i in others:
        n_cand *= (p ** T.shape[i] - 1) // (p - 1)
    if n_cand > budget.max_candidates:
        raise BudgetExceeded(
            f"{n_cand} candidate pure tensors exceed the limit {budget.max_candidates}",
            required=n_cand,
            limit=budget.max_candidates,
        )
    point_lists = [projective_points(T.shape[i], p) for i in others]
    factor_tuples = list(itertools.product(*point_lists))
    cand = np.empty((len(factor_tuples), prod(T.shape[i] for i in others)), dtype=np.int64)
    for row, factors in enumerate(factor_tuples):
        v = np.ones(1, dtype=np.int64)
        for f in factors:
            v = np.multiply.outer(v, np.asarray(f, dtype=np.int64)).reshape(-1) % p
        cand[row] = v

    slices = flatten(T, k + 1).data.astype(np.int64)
    W = linalg.PrimeEchelon(p)
    for row in slices:
        W.add(row)

    for r in range(lower, max_rank + 1):
        chosen = _search(cand, W, r, p, budget, stats)
        if chosen is not None:
            dec = _assemble(T, k, others, factor_tuples, cand, chosen, slices)
            if expand(dec) != T:
                raise AssertionError("rank search produced a decomposition that does not expand to T")
            return RankCertificate(r, dec, lower, stats)
    raise ExceedsMax(f"no decomposition with at most {max_rank} terms", max_rank, stats)


def _reduce_all(R: np.ndarray, piv: int, row: np.ndarray, p: int) -> np.ndarray:
    return (R - np.multiply.outer(R[:, piv], row)) % p


def _normalized(v: np.ndarray, p: int):
    piv = int(np.flatnonzero(v)[0])
    return piv, (v * pow(int(v[piv]), -1, p)) % p


def _search(cand, W: "linalg.PrimeEchelon", r: int, p: int, budget: SearchBudget, stats: SearchStats):
    """First ``r``-subset (lexicographic) of candidate rows whose span contains ``W``, or ``None``."""
    N = cand.shape[0]
    # candidates reduced modulo S + W, where S starts empty
    RSW = cand.copy()
    for piv, row in zip(W.pivots, W.rows):
        RSW = _reduce_all(RSW, piv, row, p)
    w = W.dim
    if w > r:
        return None

    def dfs(start, RS, RSW, dim_s, dim_sw, chosen):
        stats.nodes += 1
        if stats.nodes > budget.max_nodes:
            raise BudgetExceeded(
                f"rank search exceeded {budget.max_nodes} nodes", required=stats.nodes, limit=budget.max_nodes
            )
        needed = dim_sw - dim_s
        if needed == 0:
            return list(chosen)
        remaining = r - len(chosen)
        if remaining == 0 or N - start < remaining:
            return None
        tail_s = RS[start:]
        indep = tail_s.any(axis=1)
        in_sw = ~RSW[start:].any(axis=1)
        if needed == remaining:
            viable = indep & in_sw
            stats.prunes += int(np.count_nonzero(indep & ~in_sw))
        else:
            viable = indep
        for off in np.flatnonzero(viable):
            idx = start + int(off)
            piv, row = _normalized(RS[idx], p)
            RS2 = _reduce_all(RS, piv, row, p)
            if in_sw[off]:
                RSW2, dim_sw2 = RSW, dim_sw
            else:
                piv2, row2 = _normalized(RSW[idx], p)
                RSW2, dim_sw2 = _reduce_all(RSW, piv2, row2, p), dim_sw + 1
            chosen.append(idx)
            found = dfs(idx + 1, RS2, RSW2, dim_s + 1, dim_sw2, chosen)
            chosen.pop()
            if found is not None:
                return found
        return None

    return dfs(0, cand.copy(), RSW, 0, w, [])


def _assemble(T, k, others, factor_tuples, cand, chosen, slices) -> CPDecomposition:
    field = T.field
    P = cand[chosen]  # r x n
    coef = linalg.solve(P.T, slices.T, field)  # r x m_k
    if coef is None:
        raise AssertionError("slices are not in the span of the chosen pure tensors")
    terms = []
    for j, idx in enumerate(chosen):
        factors = [None] * T.order
        for i, f in zip(others, factor_tuples[idx]):
            factors[i] = np.asarray(f, dtype=np.int64)
        factors[k] = coef[j]
        terms.append(PureTensor(factors, field))
    return CPDecomposition(T.shape, field, terms)


# -- minimum-rank completion -------------------------------------------------


def _rank_of(B: DenseTensor, budget: SearchBudget, below: int | None = None):
    """Rank of ``B`` (matrix rank for order 2), or ``None`` if it is not below ``below``."""
    if B.order <= 2:
        r = matrix_rank(B) if B.order == 2 else int(not B.is_zero())
        return r if below is None or r < below else None
    cap = generic_rank_bound(B.shape)
    if budget.max_rank_slack is not None:
        cap = min(cap, max(flattening_ranks(B)) + budget.max_rank_slack)
    if below is not None:
        cap = min(cap, below - 1)
    try:
        return tensor_rank(B, max_rank=cap, budget=budget).rank
    except ExceedsMax:
        return None


def brute_force_min_rank(S: AffineTensorSpace, budget: SearchBudget | None = None):
    """``(rank(A, U), best)`` by enumerating every coefficient vector over GF(q).

    Coefficient vectors are visited in lexicographic order and only strict
    improvements are kept, so ``best.lambdas`` is the lexicographically
    smallest minimizer.
    """
    field = S.field
    _require_prime(field, "brute_force_min_rank")
    budget = budget or SearchBudget()
    q, s = field.p, S.s
    count = q**s
    if count > budget.max_enumeration:
        raise BudgetExceeded(
            f"{q}^{s} = {count} completions exceed the enumeration limit {budget.max_enumeration}",
            required=count,
            limit=budget.max_enumeration,
        )
    best_rank, best_lam = None, None
    for lam in itertools.product(range(q), repeat=s):
        r = _rank_of(apply_completion(S, lam), budget, below=best_rank)
        if r is None:
            continue
        best_rank, best_lam = r, list(lam)
        if r == 0:
            break
    B = apply_completion(S, best_lam)
    return best_rank, Completion(best_lam, B, best_rank)


# -- rank <= 1 over any exact field -----------------------------------------------


def has_rank_at_most_one(M: DenseTensor) -> bool:
    """All 2x2 minors vanish."""
    if M.order != 2:
        raise ValidationError("rank-one test needs a matrix")
    f = M.field
    A = M.data
    n, m = A.shape
    for i1, i2 in itertools.combinations(range(n), 2):
        for j1, j2 in itertools.combinations(range(m), 2):
            minor = f.sub(f.mul(A[i1, j1], A[i2, j2]), f.mul(A[i1, j2], A[i2, j1]))
            if not f.is_zero(minor):
                return False
    return True


@dataclass(eq=False)
class RankOneResult:
    """Outcome of the rank <= 1 decision for a partial matrix.

    ``completion`` is ``None`` when no completion of rank <= 1 exists; then
    the minimal rank is at least 2. ``unique`` is ``True`` only when the
    observed nonzero entries connect every row and column, which pins the
    completion down.
    """

    completion: Completion | None
    unique: bool

    @property
    def rank(self):
        return None if self.completion is None else self.completion.achieved_rank


def rank_one_completion(P: PartialMatrix) -> RankOneResult:
    """Decide whether ``P`` has a completion of rank at most one and build it.

    Entries of ``x y^T`` are solved along the bipartite graph of observed
    nonzero entries (rows and columns as vertices); every observed entry,
    zero or not, is then checked against the candidate.
    """
    field = P.field
    if len(P.shape) != 2:
        raise ValidationError("rank_one_completion needs a matrix")
    n, m = P.shape
    S = to_affine_space(P)
    known = {(i - 1, j - 1): v for (i, j), v in P.known.items()}
    nonzero = {pos: v for pos, v in known.items() if not field.is_zero(v)}
    if not nonzero:
        B = apply_completion(S, [field.zero] * P.s)
        return RankOneResult(Completion([field.zero] * P.s, B, 0), unique=True)

    by_row, by_col = {}, {}
    for (i, j), v in nonzero.items():
        by_row.setdefault(i, []).append((j, v))
        by_col.setdefault(j, []).append((i, v))
    x = [field.zero] * n
    y = [field.zero] * m
    seen_r, seen_c = set(), set()
    components = 0
    for start in sorted(by_row):
        if start in seen_r:
            continue
        components += 1
        x[start] = field.one
        seen_r.add(start)
        stack = [("r", start)]
        while stack:
            kind, a = stack.pop()
            if kind == "r":
                for j, v in by_row[a]:
                    if j not in seen_c:
                        y[j] = field.div(v, x[a])
                        seen_c.add(j)
                        stack.append(("c", j))
            else:
                for i, v in by_col[a]:
                    if i not in seen_r:
                        x[i] = field.div(v, y[a])
                        seen_r.add(i)
                        stack.append(("r", i))
    for (i, j), v in known.items():
        if not field.eq(field.mul(x[i], y[j]), v):
            return RankOneResult(None, unique=False)
    B = DenseTensor(field.reduce(np.multiply.outer(field.array(x), field.array(y))), field)
    lam = membership(S, B)
    unique = components == 1 and len(seen_r) == n and len(seen_c) == m
    return RankOneResult(Completion(lam, B, 1, CPDecomposition.from_factors(field, (n, m), [(x, y)])), unique)


# -- theorem checks ------------------------------------------------------------------


@dataclass(eq=False)
class TheoremReport:
    r: int
    l: int
    s: int
    equal: bool
    best: Completion
    certificate: RankCertificate
    extracted: Completion | None = None
    extracted_rank: int | None = None
    lower_bound_ok: bool = True

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "l": self.l,
            "s": self.s,
            "equal": self.equal,
            "extracted_rank": self.extracted_rank,
            "lower_bound_ok": self.lower_bound_ok,
            "nodes": self.certificate.stats.nodes,
            "prunes": self.certificate.stats.prunes,
        }


def _certify(T: DenseTensor, max_rank: int, budget: SearchBudget):
    """Certified rank or ``None`` if it exceeds ``max_rank`` (which signals a failed identity)."""
    try:
        cert = tensor_rank(T, max_rank=max_rank, budget=budget)
    except ExceedsMax as exc:
        return None, exc.stats
    return cert, cert.stats


def verify_theorem(S: AffineTensorSpace, budget: SearchBudget | None = None) -> TheoremReport:
    """Check ``rank(hat tensor) == rank(A, U) + s`` on one instance, with certificates.

    The hat tensor's rank is searched up to ``r + s + 1`` so an off-by-one
    in either direction is visible. The certified decomposition is then fed
    to :func:`extract_completion` and the extracted completion's rank must
    equal ``r``.
    """
    budget = budget or SearchBudget()
    r, best = brute_force_min_rank(S, budget)
    s = S.s
    hat = build_hat(S).tensor
    cert, _ = _certify(hat, r + s + 1, budget)
    if cert is None:
        return TheoremReport(r, -1, s, False, best, RankCertificate(-1, CPDecomposition(hat.shape, S.field), 0))
    extracted = extract_completion(S, cert.decomposition)
    ext_rank = _rank_of(extracted.matrix, budget)
    lb_ok = cert.rank >= max(flattening_ranks(hat))
    equal = cert.rank == r + s and ext_rank == r and lb_ok
    return TheoremReport(r, cert.rank, s, equal, best, cert, extracted, ext_rank, lb_ok)


@dataclass(eq=False)
class TildeReport:
    r: int
    l: int
    s: int
    equal: bool
    certificate: RankCertificate | None
    lower_bound_ok: bool = True


def verify_tilde(S: AffineTensorSpace, budget: SearchBudget | None = None) -> TildeReport:
    """Check ``rank(tilde tensor) == rank(A, U) + s`` on one instance."""
    budget = budget or SearchBudget()
    r, _ = brute_force_min_rank(S, budget)
    s = S.s
    tilde = build_tilde(S).tensor
    cert, _ = _certify(tilde, r + s + 1, budget)
    if cert is None:
        return TildeReport(r, -1, s, False, None)
    lb_ok = cert.rank >= max(flattening_ranks(tilde))
    return TildeReport(r, cert.rank, s, cert.rank == r + s and lb_ok, cert, lb_ok)


# -- instance families ----------------------------------------------------------------


def exhaustive_partial_matrices(n: int, m: int, q: int, s_max: int | None = None, s_values=None):
    """Every ``n x m`` partial matrix over GF(q): all unknown patterns and all known assignments.

    Patterns are ordered by ``s`` then lexicographically; unknowns are in
    row-major order.
    """
    field = FieldSpec.gf(q)
    cells = [(i, j) for i in range(1, n + 1) for j in range(1, m + 1)]
    if s_values is None:
        s_values = range(0, (len(cells) if s_max is None else s_max) + 1)
    for s in s_values:
        for unknown in itertools.combinations(cells, s):
            known_cells = [c for c in cells if c not in unknown]
            for values in itertools.product(range(q), repeat=len(known_cells)):
                yield PartialMatrix((n, m), dict(zip(known_cells, values)), list(unknown), field)


def random_partial_matrix(rng: np.random.Generator, shape, q: int, s: int) -> PartialMatrix:
    field = FieldSpec.gf(q)
    cells = list(itertools.product(*[range(1, m + 1) for m in shape]))
    picks = sorted(rng.choice(len(cells), size=s, replace=False).tolist())
    unknown = [cells[i] for i in picks]
    known = {c: int(rng.integers(q)) for c in cells if c not in unknown}
    return PartialMatrix(shape, known, unknown, field)


def random_pure_generators(rng: np.random.Generator, shape, field: FieldSpec, s: int, max_tries: int = 1000):
    """``s`` random nonzero pure tensors that are linearly independent."""
    gens = []
    ech = linalg.PrimeEchelon(field.p)
    for _ in range(max_tries):
        if len(gens) == s:
            break
        factors = [rng.integers(field.p, size=m) for m in shape]
        if any(not f.any() for f in factors):
            continue
        g = PureTensor(factors, field)
        if ech.add(g.vectorize().copy()):
            gens.append(g)
    if len(gens) < s:
        raise ValidationError(f"could not draw {s} independent pure tensors of shape {shape}")
    return gens


def random_affine_space(rng: np.random.Generator, shape, field: FieldSpec, s: int) -> AffineTensorSpace:
    base = DenseTensor(rng.integers(field.p, size=tuple(shape)), field)
    return AffineTensorSpace(base, random_pure_generators(rng, shape, field, s))
