"""Heuristic real-field pipeline: CP-ALS, a rank sweep, and completion through the hat tensor."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
import logging

import numpy as np

from .completion import Completion, PartialMatrix, apply_completion, to_affine_space
from .errors import NoFitFound, ValidationError
from .fields import FieldSpec
from .reduction import build_hat, extract_completion
from .tensor import CPDecomposition, DenseTensor, PureTensor, flattening_bound, matrix_rank
from . import linalg

log = logging.getLogger(__name__)

# target residual when refining an accepted fit before extraction
POLISH_TOL = 1e-14


@dataclass
class AlsConfig:
    max_iters: int = 2000
    fit_tol: float = 1e-8
    stall_tol: float = 1e-10
    restarts: int = 8
    seed: int = 0
    line_search: bool = True

    def __post_init__(self):
        if self.max_iters < 1 or self.restarts < 1:
            raise ValidationError("max_iters and restarts must be positive")
        if not (self.fit_tol > 0 and self.stall_tol > 0):
            raise ValidationError("ALS tolerances must be positive")
        if self.fit_tol < 1e-16:
            raise ValidationError("fit_tol below machine-precision scale")
        if self.seed < 0:
            raise ValidationError("seed must be unsigned")


@dataclass
class AlsResult:
    decomposition: CPDecomposition
    residual: float
    iterations: int = 0
    restart: int = 0
    history: list = dc_field(default_factory=list)


def khatri_rao(mats) -> np.ndarray:
    """Column-wise Kronecker product; the first matrix varies slowest (row-major)."""
    out = mats[0]
    for M in mats[1:]:
        out = (out[:, None, :] * M[None, :, :]).reshape(-1, out.shape[1])
    return out


def _unfold(X: np.ndarray, k: int) -> np.ndarray:
    return np.moveaxis(X, k, 0).reshape(X.shape[k], -1)


def _reconstruct(factors, shape) -> np.ndarray:
    r = factors[0].shape[1]
    if r == 0:
        return np.zeros(shape)
    return (factors[0] @ khatri_rao(factors[1:]).T).reshape(shape)


def _relative_residual(X, factors, norm_x) -> float:
    diff = np.linalg.norm(X - _reconstruct(factors, X.shape))
    return float(diff / norm_x) if norm_x > 0 else float(diff)


def _to_decomposition(factors, shape, field) -> CPDecomposition:
    r = factors[0].shape[1]
    terms = [PureTensor([F[:, j] for F in factors], field) for j in range(r)]
    return CPDecomposition(shape, field, terms)


def _als_run(X, r, cfg: AlsConfig, rng, norm_x, init=None):
    d = X.ndim
    if init is None:
        factors = [rng.standard_normal((m, r)) for m in X.shape]
    else:
        factors = [np.array(F, dtype=float) for F in init]
    unfoldings = [_unfold(X, k) for k in range(d)]
    res = _relative_residual(X, factors, norm_x)
    history = [res]
    it = 0
    for it in range(1, cfg.max_iters + 1):
        previous = [F.copy() for F in factors]
        for k in range(d):
            kr = khatri_rao([factors[i] for i in range(d) if i != k])
            # least squares  kr @ F_k^T ~ X_(k)^T, i.e. the normal equations (kr^T kr) F_k^T = kr^T X_(k)^T
            sol, *_ = np.linalg.lstsq(kr, unfoldings[k].T, rcond=None)
            factors[k] = sol.T
        if cfg.line_search and it > 2:
            # extrapolate along the sweep direction; kept only when it lowers the residual
            step = it ** (1.0 / 3.0)
            trial = [F + step * (F - P) for F, P in zip(factors, previous)]
            if _relative_residual(X, trial, norm_x) < _relative_residual(X, factors, norm_x):
                factors = trial
        norms = [np.linalg.norm(F, axis=0) for F in factors[:-1]]
        for F, nrm in zip(factors[:-1], norms):
            nrm[nrm == 0] = 1.0
            F /= nrm
        factors[-1] = factors[-1] * np.prod(norms, axis=0)
        new = _relative_residual(X, factors, norm_x)
        history.append(new)
        if new <= cfg.fit_tol or abs(res - new) <= cfg.stall_tol * max(res, 1e-300):
            res = new
            break
        res = new
    return factors, res, it, history


def cp_als(T: DenseTensor, r: int, cfg: AlsConfig | None = None, init: CPDecomposition | None = None) -> AlsResult:
    """Best ``r``-term CP fit of ``T`` over ``cfg.restarts`` seeded ALS runs.

    The reported residual is ``||T - expand(dec)||_F / ||T||_F`` (the plain
    norm of ``T - expand(dec)`` when ``T`` is zero). Ties between restarts go
    to the lower restart index. Passing ``init`` runs a single ALS pass
    starting from that decomposition instead.
    """
    cfg = cfg or AlsConfig()
    if T.field.is_exact:
        raise ValidationError(f"cp_als needs a real field, got {T.field}")
    if r < 0:
        raise ValidationError("target rank must be nonnegative")
    X = np.asarray(T.data, dtype=float)
    norm_x = float(np.linalg.norm(X))
    if r == 0:
        empty = CPDecomposition(T.shape, T.field, [])
        return AlsResult(empty, 1.0 if norm_x > 0 else 0.0)
    if init is not None:
        if len(init) != r or init.shape != T.shape:
            raise ValidationError("initial decomposition does not match the target rank and shape")
        start = [np.stack([t.factors[k] for t in init.terms], axis=1).astype(float) for k in range(T.order)]
        factors, res, it, history = _als_run(X, r, cfg, None, norm_x, init=start)
        return AlsResult(_to_decomposition(factors, T.shape, T.field), res, it, 0, history)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    best = None
    for idx, ss in enumerate(seeds):
        factors, res, it, history = _als_run(X, r, cfg, np.random.default_rng(ss), norm_x)
        log.debug("restart %d: residual %.3e after %d iterations", idx, res, it)
        if best is None or res < best.residual:
            best = AlsResult(_to_decomposition(factors, T.shape, T.field), res, it, idx, history)
        if res <= cfg.fit_tol * 1e-3:
            break
    return best


def rank_sweep(T: DenseTensor, cfg: AlsConfig | None = None):
    """Smallest ``r`` (from the unfolding lower bound upward) at which ALS fits within ``fit_tol``.

    Returns ``(r_est, AlsResult)``. The sweep stops at the product of the two
    smallest dimensions and raises :class:`NoFitFound` if nothing fits.
    """
    cfg = cfg or AlsConfig()
    if T.is_zero():
        return 0, AlsResult(CPDecomposition(T.shape, T.field, []), 0.0)
    dims = sorted(T.shape)
    cap = dims[0] * dims[1] if len(dims) > 1 else 1
    start = flattening_bound(T)
    best = None
    for r in range(start, cap + 1):
        result = cp_als(T, r, cfg)
        if best is None or result.residual < best.residual:
            best = result
        if result.residual <= cfg.fit_tol:
            return r, result
    raise NoFitFound(
        f"no CP fit within {cfg.fit_tol} up to rank {cap}; best residual {best.residual:.3e}",
        best_residual=best.residual,
    )


def complete_via_tensor(P: PartialMatrix, cfg: AlsConfig | None = None) -> Completion:
    """Complete ``P`` over the reals by fitting the hat tensor with ALS and extracting.

    The accepted fit is refined by further ALS sweeps from the same factors
    before extraction. The extraction checks run at tolerance
    ``max(field tolerance, 10 * fit_tol)`` since the fit is only guaranteed
    to ``fit_tol``. The
    returned matrix is ``apply_completion(lambdas)``, so known entries are
    reproduced exactly; ``achieved_rank`` is its singular-value rank at the
    field tolerance.
    """
    cfg = cfg or AlsConfig()
    if P.field.is_exact:
        raise ValidationError(f"complete_via_tensor needs a real field, got {P.field}")
    S = to_affine_space(P)
    if S.s == 0:
        B = S.base
        return Completion([], B, matrix_rank(B) if B.order == 2 else -1)
    hat = build_hat(S)
    r, fit = rank_sweep(hat.tensor, cfg)
    polished = cp_als(hat.tensor, r, replace(cfg, fit_tol=POLISH_TOL, stall_tol=1e-6), init=fit.decomposition)
    if polished.residual < fit.residual:
        fit = polished
    tol = max(P.field.tolerance, 10 * cfg.fit_tol)
    extracted = extract_completion(S, fit.decomposition, tol=tol)
    B = apply_completion(S, extracted.lambdas)
    rank = linalg.rank(B.data.reshape(B.shape[0], -1), P.field)
    return Completion(extracted.lambdas, B, rank, extracted.decomposition)
