"""``rankbridge`` command-line front end.

Subcommands::

    rankbridge reduce   PROBLEM [--variant hat|tilde] [--out FILE]
    rankbridge complete PROBLEM --method brute|exact-tensor|als|rank1 [...]
    rankbridge verify   [PROBLEM | --exhaustive N M SMAX Q] [--variant hat|tilde]
    rankbridge rank     TENSOR [--field F] [--max-rank R]

Exit codes: 0 success, 2 usage, 3 validation, 4 budget or search limit,
5 internal-invariant violation.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import io
from .als import AlsConfig, complete_via_tensor
from .completion import apply_completion, membership, to_affine_space
from .errors import (
    BudgetExceeded,
    ExceedsMax,
    InconsistentDecomposition,
    NoFitFound,
    RankBridgeError,
    SpanningFailure,
    ValidationError,
)
from .exact import (
    DEFAULT_MAX_NODES,
    SearchBudget,
    brute_force_min_rank,
    budget_from_env,
    exhaustive_partial_matrices,
    rank_one_completion,
    tensor_rank,
    verify_theorem,
    verify_tilde,
)
from .fields import FieldSpec
from .reduction import build_hat, build_tilde, extract_completion
from .tensor import flattening_ranks, matrix_rank

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_BUDGET, EXIT_INTERNAL = 0, 2, 3, 4, 5


class UsageError(RankBridgeError):
    pass


def _budget(args) -> SearchBudget:
    nodes = args.budget_nodes if args.budget_nodes is not None else budget_from_env(DEFAULT_MAX_NODES)
    return SearchBudget(max_nodes=nodes)


def _als_config(args) -> AlsConfig:
    overrides = {"max_iters": args.als_iters, "restarts": args.als_restarts}
    return AlsConfig(seed=args.seed, **{k: v for k, v in overrides.items() if v is not None})


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_problem(args):
    text = _read(args.problem)
    pf = io.parse_problem(text)
    if getattr(args, "field", None):
        pf = pf.with_field(FieldSpec.parse(args.field))
    return pf, io.digest(pf.dumps())


def _emit(args, text: str):
    if getattr(args, "out", None):
        io.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _report(args, command: str, input_digest: str | None, results: dict, started: float, budget=None) -> str:
    out = {
        "version": io.FORMAT_VERSION,
        "kind": "report",
        "command": command,
        "input_digest": input_digest,
        "results": results,
        "timing": {"seconds": round(time.perf_counter() - started, 6)},
    }
    if budget is not None:
        out["budget"] = budget
    return io.canonical_json(out)


def _matrix_rows(T):
    return np.vectorize(T.field.format, otypes=[object])(T.data).tolist()


def _completion_results(S, C, field) -> dict:
    # reported completions must re-verify against the input
    if not field.arrays_equal(apply_completion(S, C.lambdas).data, C.matrix.data):
        raise InconsistentDecomposition("reported lambdas do not reproduce the reported matrix")
    if membership(S, C.matrix) is None:
        raise InconsistentDecomposition("reported completion is not in A + U")
    return {
        "lambdas": [field.format(v) for v in C.lambdas],
        "completion": _matrix_rows(C.matrix),
    }


# -- commands --------------------------------------------------------------------------------


def cmd_reduce(args) -> int:
    started = time.perf_counter()
    pf, dig = _load_problem(args)
    S = pf.to_space()
    if args.variant == "hat":
        T = build_hat(S).tensor
        slots = {"variant": "hat", "s": S.s, "base_slot": S.s + 1, "generator_slots": list(range(1, S.s + 1))}
    else:
        T = build_tilde(S).tensor
        slots = {"variant": "tilde", "s": S.s, "base_pattern": [1] * S.s,
                 "generator_patterns": [[2 if j == k else 1 for j in range(S.s)] for k in range(S.s)]}
    slots["input_digest"] = dig
    _emit(args, io.dump_tensor(T, slots))
    return EXIT_OK


def cmd_complete(args) -> int:
    started = time.perf_counter()
    pf, dig = _load_problem(args)
    field = pf.field
    method = args.method
    if method in ("brute", "exact-tensor") and not field.is_prime:
        raise UsageError(f"--method {method} needs a gf:<p> field, got {field}")
    if method == "als" and field.is_exact:
        raise UsageError(f"--method als needs a real field, got {field} (try --field real:1e-9)")
    if method == "rank1" and not field.is_exact:
        raise UsageError("--method rank1 needs an exact field")
    S = pf.to_space()
    budget = _budget(args)
    results: dict = {"method": method, "field": str(field), "s": S.s}
    budget_info = None

    if method == "brute":
        r, best = brute_force_min_rank(S, budget)
        results.update(rank=r, exact=True, **_completion_results(S, best, field))
        if best.matrix.order >= 2:
            cert = tensor_rank(best.matrix, budget=budget)
            results["certificate"] = {"enumerated": field.p**S.s, "decomposition": io.decomposition_to_list(cert.decomposition)}
    elif method == "exact-tensor":
        hat = build_hat(S).tensor
        max_rank = args.max_rank
        cert = tensor_rank(hat, max_rank=max_rank, budget=budget)
        C = extract_completion(S, cert.decomposition)
        results.update(rank=cert.rank - S.s, hat_rank=cert.rank, exact=True, **_completion_results(S, C, field))
        results["certificate"] = {
            "hat_shape": list(hat.shape),
            "lower_bound": cert.lower_bound,
            "decomposition": io.decomposition_to_list(cert.decomposition),
        }
        budget_info = {"nodes": cert.stats.nodes, "prunes": cert.stats.prunes, "max_nodes": budget.max_nodes}
    elif method == "als":
        cfg = _als_config(args)
        C = complete_via_tensor(pf.to_partial_matrix(), cfg)
        results.update(rank=C.achieved_rank, exact=False, **_completion_results(S, C, field))
        results["als"] = {"max_iters": cfg.max_iters, "restarts": cfg.restarts, "seed": cfg.seed, "fit_tol": cfg.fit_tol}
    else:
        res = rank_one_completion(pf.to_partial_matrix())
        if res.completion is None:
            results.update(rank=None, rank_at_least=2, exact=True)
        else:
            results.update(rank=res.completion.achieved_rank, unique=res.unique, exact=True,
                           **_completion_results(S, res.completion, field))
    _emit(args, _report(args, f"complete --method {method}", dig, results, started, budget_info))
    return EXIT_OK


def cmd_verify(args) -> int:
    started = time.perf_counter()
    budget = _budget(args)
    verify = verify_theorem if args.variant == "hat" else verify_tilde
    instances = []
    dig = None
    if args.exhaustive:
        n, m, smax, q = args.exhaustive
        source = exhaustive_partial_matrices(n, m, q, s_max=smax)
        spaces = (to_affine_space(P) for P in source)
    else:
        if not args.problem:
            raise UsageError("verify needs a problem file or --exhaustive N M SMAX Q")
        pf, dig = _load_problem(args)
        if not pf.field.is_prime:
            raise UsageError(f"verify needs a gf:<p> field, got {pf.field}")
        spaces = [pf.to_space()]
    failures = budget_hits = total = 0
    for idx, S in enumerate(spaces):
        total += 1
        try:
            rep = verify(S, budget)
        except BudgetExceeded as exc:
            budget_hits += 1
            instances.append({"index": idx, "status": "budget", "message": str(exc)})
            continue
        ok = rep.equal
        failures += not ok
        row = {"index": idx, "r": rep.r, "l": rep.l, "s": rep.s, "equal": ok}
        if not args.exhaustive or not ok:
            instances.append(row)
    results = {
        "variant": args.variant,
        "instances": total,
        "failures": failures,
        "budget_exceeded": budget_hits,
        "all_equal": failures == 0 and budget_hits == 0,
        "details": instances,
    }
    if args.exhaustive:
        results["family"] = dict(zip(("n", "m", "smax", "q"), args.exhaustive))
    _emit(args, _report(args, "verify", dig, results, started, {"max_nodes": budget.max_nodes}))
    if failures:
        return EXIT_INTERNAL
    return EXIT_BUDGET if budget_hits else EXIT_OK


def cmd_rank(args) -> int:
    started = time.perf_counter()
    text = _read(args.tensor)
    field = FieldSpec.parse(args.field) if args.field else None
    T, _ = io.parse_tensor(text, field)
    if not T.field.is_prime:
        raise UsageError(f"rank needs a gf:<p> field, got {T.field}")
    budget = _budget(args)
    dig = io.digest(io.dump_tensor(T))
    try:
        cert = tensor_rank(T, max_rank=args.max_rank, budget=budget)
    except ExceedsMax as exc:
        results = {"rank": None, "exceeds_max": args.max_rank, "message": str(exc)}
        _emit(args, _report(args, "rank", dig, results, started, {"max_nodes": budget.max_nodes}))
        return EXIT_BUDGET
    if cert.rank < max(flattening_ranks(T)):
        raise AssertionError("certificate below the unfolding lower bound")
    results = {
        "rank": cert.rank,
        "lower_bound": cert.lower_bound,
        "shape": list(T.shape),
        "decomposition": io.decomposition_to_list(cert.decomposition),
    }
    if T.order == 2:
        results["matrix_rank"] = matrix_rank(T)
    budget_info = {"nodes": cert.stats.nodes, "prunes": cert.stats.prunes, "max_nodes": budget.max_nodes}
    _emit(args, _report(args, "rank", dig, results, started, budget_info))
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankbridge", description="Low-rank completion through tensor rank.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, problem=True):
        if problem:
            p.add_argument("--field", help='override the field: "gf:<p>", "rational" or "real:<tol>"')
        p.add_argument("--budget-nodes", type=int, default=None,
                       help="node budget for exact search (default: $RANKBRIDGE_BUDGET_NODES or 1e8)")
        p.add_argument("--out", help="write output here (atomically) instead of stdout")

    p = sub.add_parser("reduce", help="write the lifted tensor of a problem")
    p.add_argument("problem")
    p.add_argument("--variant", choices=["hat", "tilde"], default="hat")
    common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("complete", help="find a minimal-rank completion")
    p.add_argument("problem")
    p.add_argument("--method", choices=["brute", "exact-tensor", "als", "rank1"], required=True)
    p.add_argument("--max-rank", type=int, default=None)
    p.add_argument("--als-iters", type=int, default=None)
    p.add_argument("--als-restarts", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("verify", help="check rank(lift) = rank(A, U) + s")
    p.add_argument("problem", nargs="?")
    p.add_argument("--exhaustive", nargs=4, type=int, metavar=("N", "M", "SMAX", "Q"))
    p.add_argument("--variant", choices=["hat", "tilde"], default="hat")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rank", help="certified tensor rank of a tensor file")
    p.add_argument("tensor")
    p.add_argument("--max-rank", type=int, default=None)
    common(p, problem=False)
    p.add_argument("--field", help="override the tensor file's field")
    p.set_defaults(func=cmd_rank)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rankbridge: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"rankbridge: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (BudgetExceeded, ExceedsMax, NoFitFound) as exc:
        print(f"rankbridge: search limit: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InconsistentDecomposition, SpanningFailure, AssertionError) as exc:
        print(f"rankbridge: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except RankBridgeError as exc:
        print(f"rankbridge: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
