"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line (shown even without ``-s``).
Certificates produced by the exact searches in criteria 2 to 5 are recorded
and checked against the unfolding lower bound in criterion 9.
"""
import itertools
import time

import numpy as np
import pytest

import rankbridge.exact as exact
from rankbridge import (
    AffineTensorSpace,
    CPDecomposition,
    DenseTensor,
    FieldSpec,
    PureTensor,
    build_hat,
    embed_completion,
    expand,
    extract_completion,
    matrix_rank,
    membership,
    rank_one_completion,
    tensor_rank,
    to_affine_space,
    verify_theorem,
    verify_tilde,
)
from rankbridge.als import AlsConfig, complete_via_tensor, rank_sweep
from rankbridge.completion import Completion, apply_completion
from rankbridge.exact import (
    SearchBudget,
    exhaustive_partial_matrices,
    random_affine_space,
    random_partial_matrix,
    random_pure_generators,
)
from rankbridge.tensor import flattening_ranks
from conftest import GOLDEN, GOLDEN_LAMBDAS, worked_partial

SEED = 20240611
CERTIFICATES = []


@pytest.fixture
def record_certificates(monkeypatch):
    original = exact.tensor_rank

    def recording(T, *args, **kwargs):
        cert = original(T, *args, **kwargs)
        CERTIFICATES.append((T, cert))
        return cert

    monkeypatch.setattr(exact, "tensor_rank", recording)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {title} ({detail})")

    return emit


def test_criterion_1_golden_example(report):
    t0 = time.perf_counter()
    P = worked_partial()
    S = to_affine_space(P)
    res = rank_one_completion(P)
    hat = build_hat(S)
    dec_hat = embed_completion(S, res.completion, res.completion.decomposition)
    back = extract_completion(S, dec_hat)
    elapsed = time.perf_counter() - t0
    ok = (
        res.rank == 1
        and res.unique
        and res.completion.matrix.tolist() == GOLDEN
        and hat.tensor.shape == (3, 3, 5)
        and len(dec_hat) == 5
        and expand(dec_hat) == hat.tensor
        and back.matrix.tolist() == GOLDEN
        and back.lambdas == GOLDEN_LAMBDAS
        and elapsed < 1.0
    )
    report(1, "golden example over Q", ok, f"{elapsed:.3f}s")
    assert ok


def _theorem_run(spaces, verify=verify_theorem):
    failures, total = [], 0
    for S in spaces:
        total += 1
        rep = verify(S, SearchBudget())
        if not rep.equal:
            failures.append((S, rep))
    return total, failures


def test_criterion_2_theorem_exhaustive_gf2(report, record_certificates):
    t0 = time.perf_counter()
    spaces = (to_affine_space(P) for P in exhaustive_partial_matrices(2, 2, 2, s_values=range(5)))
    total, failures = _theorem_run(spaces)
    ok = total == 81 and not failures
    report(2, "rank(hat) = rank(A,U) + s, all GF(2) 2x2", ok, f"{total} instances, {len(failures)} failures, {time.perf_counter() - t0:.2f}s")
    assert ok


def _criterion_3_instances(n=500):
    # GF(3) on 2x2 and 2x3, plus GF(2) on 2x3; s uniform in 0..3
    rng = np.random.default_rng(SEED)
    families = [((2, 2), 3), ((2, 3), 3), ((2, 3), 2)]
    for i in range(n):
        shape, q = families[i % len(families)]
        s = int(rng.integers(0, 4))
        yield to_affine_space(random_partial_matrix(rng, shape, q, s))


def test_criterion_3_theorem_sampled(report, record_certificates):
    t0 = time.perf_counter()
    total, failures = _theorem_run(_criterion_3_instances())
    ok = total == 500 and not failures
    report(3, "rank(hat) = rank(A,U) + s, 500 sampled GF(3)/2x3", ok, f"{len(failures)} failures, {time.perf_counter() - t0:.2f}s")
    assert ok


def test_criterion_4_tilde_exhaustive_gf2(report, record_certificates):
    t0 = time.perf_counter()
    spaces = (to_affine_space(P) for P in exhaustive_partial_matrices(2, 2, 2, s_max=3))
    total, failures = _theorem_run(spaces, verify_tilde)
    ok = total == 80 and not failures
    report(4, "rank(tilde) = rank(A,U) + s, GF(2) 2x2, s <= 3", ok, f"{total} instances, {len(failures)} failures, {time.perf_counter() - t0:.2f}s")
    assert ok


def test_criterion_5_order_three(report, record_certificates):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 5)
    F = FieldSpec.gf(2)
    spaces = [random_affine_space(rng, (2, 2, 2), F, int(rng.integers(0, 3))) for _ in range(100)]
    budget_hits = 0
    failures = 0
    for S in spaces:
        try:
            failures += not verify_theorem(S, SearchBudget()).equal
        except exact.BudgetExceeded:
            budget_hits += 1
    ok = failures == 0 and budget_hits == 0
    report(5, "order-3 bases, 100 GF(2) 2x2x2, s <= 2", ok, f"{failures} failures, {budget_hits} budget hits, {time.perf_counter() - t0:.2f}s")
    assert ok


def _round_trip_case(rng):
    q = int(rng.choice([2, 3]))
    F = FieldSpec.gf(q)
    shape = tuple(int(m) for m in rng.integers(2, 4, size=2))
    r = int(rng.integers(0, 4))
    dec_B = CPDecomposition.from_factors(
        F, shape, [[rng.integers(0, q, size=m) for m in shape] for _ in range(r)]
    )
    B = expand(dec_B)
    s = int(rng.integers(0, 4))
    gens = random_pure_generators(rng, shape, F, s)
    lam = [int(v) for v in rng.integers(0, q, size=s)]
    shift = apply_completion(AffineTensorSpace(DenseTensor.zeros(shape, F), gens), lam)
    S = AffineTensorSpace(B - shift, gens)
    return S, Completion(lam, B, matrix_rank(B)), dec_B, r


def test_criterion_6_round_trip(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 6)
    failures = 0
    for _ in range(1000):
        S, C, dec_B, r = _round_trip_case(rng)
        out = extract_completion(S, embed_completion(S, C, dec_B))
        lam = membership(S, out.matrix)
        ok_case = lam is not None and lam == out.lambdas and matrix_rank(out.matrix) <= r
        failures += not ok_case
    ok = failures == 0
    report(6, "extract(embed(...)) round trip, 1000 cases", ok, f"{failures} failures, {time.perf_counter() - t0:.2f}s")
    assert ok


def test_criterion_7_order_two_consistency(report):
    t0 = time.perf_counter()
    F = FieldSpec.gf(2)
    total = failures = 0
    for n, m in itertools.product(range(1, 4), repeat=2):
        for bits in itertools.product(range(2), repeat=n * m):
            T = DenseTensor(np.array(bits).reshape(n, m), F)
            total += 1
            failures += tensor_rank(T).rank != matrix_rank(T)
    ok = failures == 0
    report(7, "tensor_rank = matrix_rank on all GF(2) matrices up to 3x3", ok, f"{total} matrices, {failures} failures, {time.perf_counter() - t0:.2f}s")
    assert ok


def test_criterion_8_real_pipeline(report):
    t0 = time.perf_counter()
    R = FieldSpec.real(1e-9)
    P = worked_partial(R)
    hat = build_hat(to_affine_space(P)).tensor
    golden = np.array(GOLDEN, dtype=float)
    passed = []
    for seed in range(8):
        cfg = AlsConfig(seed=seed)
        r_est, fit = rank_sweep(hat, cfg)
        C = complete_via_tensor(P, cfg)
        sv = np.linalg.svd(C.matrix.data.astype(float), compute_uv=False)
        passed.append(
            r_est == 5
            and fit.residual < 1e-6
            and np.max(np.abs(C.matrix.data - golden)) <= 1e-6
            and sv[1] / sv[0] < 1e-6
        )
    elapsed = time.perf_counter() - t0
    ok = sum(passed) >= 7 and elapsed < 30
    report(8, "real pipeline on the worked example", ok, f"{sum(passed)}/8 seeds, {elapsed:.2f}s")
    assert ok


def test_criterion_9_pruning_soundness(report):
    assert CERTIFICATES, "criteria 2 to 5 must run first"
    bad = [cert for T, cert in CERTIFICATES if cert.rank < max(flattening_ranks(T)) or expand(cert.decomposition) != T]
    ok = not bad
    report(9, "every certificate >= unfolding bound and expands to its tensor", ok, f"{len(CERTIFICATES)} certificates, {len(bad)} violations")
    assert ok
