"""End-to-end acceptance suite.

One test per acceptance criterion.  Every test prints a single
machine-readable ``[criterion NN] PASS/FAIL`` line with the measured
quantities (bypassing capture so the line is visible in a plain
``pytest -v`` run) and then asserts the criterion's thresholds.

Criterion 3 is asserted literally and is expected to fail at the stated
sizes: with rank 8 the left multiplier keeps k = 34 sketch rows whose
combined support is 34 * 2**3 = 272 of 1024 input rows, i.e. 26.6 % of
the entries before the column sketch is even counted, so the 25 % read
budget is unattainable.  The test is marked ``xfail(strict=True)`` so
the honest failure is recorded without breaking the suite, and a green
companion test pins down the actual invariant (reads bounded by the
multiplier support) plus the same pipeline at 2048, where the budget
holds with margin.
"""

import json
import time
from functools import lru_cache

import numpy as np
import pytest

from sublra import (
    FlopCounter,
    MatrixOracle,
    RankDeficientError,
    TopSVD,
    adversarial_sweep,
    canonical_cur,
    delta_matrix,
    dual_random,
    fro_norm,
    gen_abridged_hadamard,
    gen_gaussian,
    geometric_spectrum,
    homotopy_refine,
    init_refine_state,
    load_config,
    lra_to_topsvd,
    nystrom_reconstruct,
    qrp,
    recompress,
    refine_residual,
    run,
    sketch,
    subspace_distance,
    svd,
    tail_norm,
    truncate_svd,
    verify_cur_exactness,
)

SIZES = 64
RANKS = (1, 2, 4, 8)
SEEDS_PER_RANK = 25


def _report(capsys, line):
    with capsys.disabled():
        print(f"\n{line}")


def _rel_err(approx, dense):
    return fro_norm(approx - dense) / fro_norm(dense)


@pytest.fixture(scope="module", autouse=True)
def _warm_numerical_kernels():
    """Trigger JIT compilation before any timed region."""
    a = np.arange(12.0).reshape(3, 4)
    svd(a)
    svd(np.ascontiguousarray(a.T))
    qrp(a)
    o = MatrixOracle(np.eye(8))
    s = sketch(o, gen_gaussian(6, 8, 0), gen_gaussian(8, 3, 1))
    recompress(nystrom_reconstruct(s, 1), 1)


# ---------------------------------------------------------------------------
# criteria 1, 2, 4 share the trial corpus: run once, audit separately
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _exact_rank_suite():
    """100 exact rank-rho inputs, Gaussian sketch, full reconstruction."""
    cases = []
    t0 = time.perf_counter()
    for rho in RANKS:
        k, l = 4 * rho + 2, 2 * rho + 1
        for i in range(SEEDS_PER_RANK):
            seed = 10_000 + 97 * rho + i
            a, _ = dual_random(SIZES, SIZES, rho, geometric_spectrum(rho),
                               noise=0.0, seed=seed)
            oracle = MatrixOracle(a)
            f = gen_gaussian(k, SIZES, seed + 1)
            h = gen_gaussian(SIZES, l, seed + 2)
            s = sketch(oracle, f, h)
            _, tops = recompress(nystrom_reconstruct(s, rho), rho)
            approx = tops.matrix()
            cases.append({"rho": rho, "matrix": a, "approx": approx,
                          "rel_err": _rel_err(approx, a)})
    return cases, time.perf_counter() - t0


@lru_cache(maxsize=None)
def _noisy_structured_suite():
    """Same sizes with 1e-3 noise and depth-3 abridged Hadamard multipliers."""
    cases = []
    t0 = time.perf_counter()
    for rho in RANKS:
        k, l = 4 * rho + 2, 2 * rho + 1
        for i in range(SEEDS_PER_RANK):
            seed = 20_000 + 131 * rho + i
            a, _ = dual_random(SIZES, SIZES, rho, geometric_spectrum(rho),
                               noise=1e-3, seed=seed)
            oracle = MatrixOracle(a)
            f = gen_abridged_hadamard(SIZES, 3, k, seed + 1, side="left")
            h = gen_abridged_hadamard(SIZES, 3, l, seed + 2, side="right")
            s = sketch(oracle, f, h)
            _, tops = recompress(nystrom_reconstruct(s, rho), rho)
            approx = tops.matrix()
            tau = tail_norm(np.linalg.svd(a, compute_uv=False), rho)
            cases.append({"rho": rho, "matrix": a, "approx": approx,
                          "error_ratio": fro_norm(approx - a) / tau,
                          "fraction": oracle.access_report().fraction})
    return cases, time.perf_counter() - t0


def test_criterion_01_exact_rank_recovery(capsys):
    cases, elapsed = _exact_rank_suite()
    errs = [c["rel_err"] for c in cases]
    hits = sum(e <= 1e-8 for e in errs)
    ok = hits == 100 and elapsed < 10.0
    _report(capsys, f"[criterion 01] {'PASS' if ok else 'FAIL'} — "
                    f"exact-rank recovery {hits}/100 at rel err <= 1e-8, "
                    f"worst {max(errs):.2e}, {elapsed:.2f} s (< 10 s)")
    assert hits == 100
    assert elapsed < 10.0


def test_criterion_02_noisy_structured_accuracy(capsys):
    cases, elapsed = _noisy_structured_suite()
    ratios = np.array([c["error_ratio"] for c in cases])
    med = float(np.median(ratios))
    p95 = float(np.percentile(ratios, 95))
    ok = med <= 4.0 and p95 <= 10.0 and elapsed < 30.0
    _report(capsys, f"[criterion 02] {'PASS' if ok else 'FAIL'} — "
                    f"error ratio median {med:.3f} (<= 4), p95 {p95:.3f} "
                    f"(<= 10), max {ratios.max():.3f}, {elapsed:.2f} s (< 30 s)")
    assert med <= 4.0
    assert p95 <= 10.0
    assert elapsed < 30.0


# ---------------------------------------------------------------------------
# criterion 3: sublinear read fraction
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _structured_pipeline_reads(n, seed):
    rho, d = 8, 3
    k, l = 4 * rho + 2, 2 * rho + 1
    a, _ = dual_random(n, n, rho, geometric_spectrum(rho), noise=1e-3,
                       seed=seed)
    oracle = MatrixOracle(a)
    f = gen_abridged_hadamard(n, d, k, seed + 1, side="left")
    h = gen_abridged_hadamard(n, d, l, seed + 2, side="right")
    s = sketch(oracle, f, h)
    _, tops = recompress(nystrom_reconstruct(s, rho), rho)
    report = oracle.access_report()
    return {
        "reads": report.reads,
        "fraction": report.fraction,
        "rel_err": _rel_err(tops.matrix(), a),
        "support_bound": k * 2 ** d * n + n * l * 2 ** d,
    }


@pytest.mark.xfail(
    strict=True,
    reason="at 1024 with rank 8, depth 3, the left multiplier's support "
           "alone spans 34 * 8 = 272 of 1024 rows (26.6% of all entries), "
           "so the 25% budget cannot be met; see the scaling companion test",
)
def test_criterion_03_sublinear_reads_at_1024(capsys):
    out = _structured_pipeline_reads(1024, 30_000)
    ok = out["fraction"] < 0.25
    _report(capsys, f"[criterion 03] {'PASS' if ok else 'FAIL (expected)'} — "
                    f"read fraction {out['fraction']:.4f} at n=1024, rho=8, "
                    f"d=3 (assert < 0.25; left-support floor is 272/1024 = "
                    f"0.2656 of entries)")
    assert out["fraction"] < 0.25


def test_criterion_03_read_bound_and_scaling_companion(capsys):
    at_1024 = _structured_pipeline_reads(1024, 30_000)
    bound = at_1024["support_bound"]
    at_2048 = _structured_pipeline_reads(2048, 30_010)
    ok = (at_1024["reads"] <= bound and at_2048["fraction"] < 0.25
          and at_2048["rel_err"] < 0.01)
    _report(capsys, f"[criterion 03b] {'PASS' if ok else 'FAIL'} — "
                    f"reads {at_1024['reads']} <= support bound {bound} "
                    f"at 1024; companion n=2048 fraction "
                    f"{at_2048['fraction']:.4f} < 0.25 with rel err "
                    f"{at_2048['rel_err']:.2e}")
    assert at_1024["reads"] <= bound
    assert at_2048["fraction"] < 0.25
    assert at_2048["rel_err"] < 0.01


# ---------------------------------------------------------------------------
# criterion 4: truncation audit over every approximation from 1-2
# ---------------------------------------------------------------------------


def test_criterion_04_truncation_audit(capsys):
    exact_cases, _ = _exact_rank_suite()
    noisy_cases, _ = _noisy_structured_suite()
    violations = 0
    total = 0
    worst_margin = -np.inf
    for case in exact_cases + noisy_cases:
        a, p, rho = case["matrix"], case["approx"], case["rho"]
        u, sig, vt = np.linalg.svd(p, full_matrices=False)
        p_rho = (u[:, :rho] * sig[:rho]) @ vt[:rho, :]
        tau = tail_norm(np.linalg.svd(a, compute_uv=False), rho)
        lhs = fro_norm(p_rho - a)
        rhs = tau + 2.0 * fro_norm(p - a) + 1e-8 * fro_norm(a)
        worst_margin = max(worst_margin, lhs - rhs)
        violations += lhs > rhs
        total += 1
    ok = violations == 0
    _report(capsys, f"[criterion 04] {'PASS' if ok else 'FAIL'} — "
                    f"{violations}/{total} violations of "
                    f"err(P_rho) <= tau + 2 err(P) + 1e-8 ||M||, "
                    f"worst margin {worst_margin:.2e}")
    assert violations == 0


# ---------------------------------------------------------------------------
# criterion 5: three property sub-suites
# ---------------------------------------------------------------------------


def test_criterion_05a_truncation_optimality(capsys):
    instances = [(4, 6, 1), (6, 4, 2), (5, 5, 3), (6, 6, 2), (3, 6, 1),
                 (6, 3, 2), (5, 6, 3), (6, 5, 1), (4, 4, 2), (6, 6, 3)]
    violations = 0
    total = 0
    for idx, (m, n, rho) in enumerate(instances):
        rng = np.random.default_rng(50_000 + idx)
        a = rng.standard_normal((m, n))
        s = svd(a)
        opt = fro_norm(a - truncate_svd(s, rho).matrix())
        assert abs(opt - tail_norm(s.sigma, rho)) <= 1e-12 * max(1.0, opt)
        for j in range(100):
            style = j % 3
            if style == 0:
                x = rng.standard_normal((m, rho))
                y = np.linalg.lstsq(x, a, rcond=None)[0]
            elif style == 1:
                eps = 10.0 ** rng.uniform(-3.0, 0.0)
                x = (s.U[:, :rho] + eps * rng.standard_normal((m, rho))) \
                    * s.sigma[:rho]
                y = (s.V[:, :rho] + eps * rng.standard_normal((n, rho))).T
            else:
                x = rng.standard_normal((m, rho))
                y = rng.standard_normal((rho, n))
                scale = fro_norm(x @ y)
                if scale > 0:
                    x *= fro_norm(a) / scale
            competitor = fro_norm(a - x @ y)
            violations += competitor < opt - 1e-10 * max(1.0, fro_norm(a))
            total += 1
    ok = violations == 0
    _report(capsys, f"[criterion 05a] {'PASS' if ok else 'FAIL'} — "
                    f"{violations}/{total} rank-rho competitors beat the "
                    f"svd truncation")
    assert total == 1000
    assert violations == 0


def test_criterion_05b_singular_value_perturbation(capsys):
    shapes = [(8, 8), (6, 9), (9, 6), (7, 7)]
    violations = 0
    worst = -np.inf
    for idx in range(200):
        m, n = shapes[idx % len(shapes)]
        rng = np.random.default_rng(60_000 + idx)
        a = rng.standard_normal((m, n))
        e = rng.standard_normal((m, n))
        e *= 10.0 ** rng.uniform(-3.0, 0.0) / fro_norm(e)
        spectral = svd(e).sigma[0]
        sig_a = svd(a).sigma
        sig_ae = svd(a + e).sigma
        r = min(m, n)
        gap = np.max(np.abs(np.pad(sig_ae, (0, r - sig_ae.size))
                            - np.pad(sig_a, (0, r - sig_a.size))))
        margin = gap - spectral
        worst = max(worst, margin)
        violations += margin > 1e-10
    ok = violations == 0
    _report(capsys, f"[criterion 05b] {'PASS' if ok else 'FAIL'} — "
                    f"{violations}/200 pairs broke "
                    f"|sigma_j(M+E) - sigma_j(M)| <= ||E||_2 + 1e-10, "
                    f"worst margin {worst:.2e}")
    assert violations == 0


def test_criterion_05c_subspace_stability(capsys):
    violations = 0
    worst_ratio = 0.0
    for idx in range(100):
        rng = np.random.default_rng(70_000 + idx)
        m, n = (10, 8) if idx % 2 == 0 else (9, 11)
        rho = 1 + idx % 3
        top = np.linspace(2.0, 1.2, rho)
        tail = np.linspace(0.5, 0.1, min(m, n) - rho)
        sigma = np.concatenate([top, tail])
        gap = top[-1] - tail[0]
        assert gap > 0
        u, _ = np.linalg.qr(rng.standard_normal((m, m)))
        v, _ = np.linalg.qr(rng.standard_normal((n, n)))
        a = (u[:, :sigma.size] * sigma) @ v[:, :sigma.size].T
        e = rng.standard_normal((m, n))
        e *= rng.uniform(0.1, 1.0) * 0.2 * gap / fro_norm(e)
        base = truncate_svd(svd(a), rho)
        pert = truncate_svd(svd(a + e), rho)
        bound = 4.0 * fro_norm(e) / gap + 1e-8
        d_left = subspace_distance(base.U, pert.U)
        d_right = subspace_distance(base.V, pert.V)
        worst_ratio = max(worst_ratio, d_left / bound, d_right / bound)
        violations += d_left > bound or d_right > bound
    ok = violations == 0
    _report(capsys, f"[criterion 05c] {'PASS' if ok else 'FAIL'} — "
                    f"{violations}/100 pairs broke the 4||E||_F/g subspace "
                    f"bound (worst distance/bound {worst_ratio:.3f})")
    assert violations == 0


# ---------------------------------------------------------------------------
# criterion 6: cross exactness iff the generator has full input rank
# ---------------------------------------------------------------------------


def test_criterion_06_cross_exactness_iff_generator_rank(capsys):
    checked = 0
    # exact direction: leading identity blocks give G = I_r
    for r, (m, n) in [(1, (5, 6)), (2, (6, 5)), (3, (6, 6))]:
        rng = np.random.default_rng(600 + r)
        x = np.vstack([np.eye(r), rng.standard_normal((m - r, r))])
        y = np.hstack([np.eye(r), rng.standard_normal((r, n - r))])
        a = x @ y
        oracle = MatrixOracle(a)
        cur = canonical_cur(oracle, np.arange(r), np.arange(r), r)
        err = fro_norm(cur.matrix() - a)
        sigma1 = svd(a).sigma[0]
        assert err <= 1e-10 * sigma1, f"rank-{r} exact cross missed: {err}"
        assert verify_cur_exactness(oracle, cur)
        checked += 1
    # deficient direction, rank 1: the selected row is zero
    rng = np.random.default_rng(610)
    xv = rng.standard_normal(6)
    xv[0] = 0.0
    a = np.outer(xv, rng.standard_normal(6))
    with pytest.raises(RankDeficientError):
        canonical_cur(MatrixOracle(a), [0], [0], 1)
    checked += 1
    # deficient direction, ranks 2-3: duplicated row collapses the generator
    for r in (2, 3):
        rng = np.random.default_rng(620 + r)
        x = rng.standard_normal((6, r))
        x[1] = x[0]
        a = x @ rng.standard_normal((r, 6))
        oracle = MatrixOracle(a)
        rows, cols = np.arange(r), np.arange(r)
        with pytest.raises(RankDeficientError):
            canonical_cur(oracle, rows, cols, r)
        reduced = canonical_cur(oracle, rows, cols, r - 1)
        assert not verify_cur_exactness(oracle, reduced)
        assert fro_norm(reduced.matrix() - a) > 1e-6 * fro_norm(a)
        checked += 1
    _report(capsys, f"[criterion 06] PASS — cross exact iff generator rank "
                    f"equals input rank: {checked}/6 constructions, both "
                    f"directions, ranks 1-3")
    assert checked == 6


# ---------------------------------------------------------------------------
# criterion 7: conversion cost and accuracy over a mixed corpus
# ---------------------------------------------------------------------------


def _conversion_corpus():
    cases = []
    plain = [(40, 8, 6, 30, 4), (25, 5, 7, 35, 3), (60, 10, 10, 60, 6),
             (32, 6, 6, 32, 2)]
    for idx, (m, l, k, n, r) in enumerate(plain):
        rng = np.random.default_rng(80_000 + idx)
        cases.append((rng.standard_normal((m, l)),
                      rng.standard_normal((l, k)),
                      rng.standard_normal((k, n)), r))
    # ill-scaled cores spanning six orders of magnitude
    for idx, (m, l, n, r) in enumerate([(40, 8, 30, 5), (48, 10, 40, 4),
                                        (36, 6, 36, 3)]):
        rng = np.random.default_rng(81_000 + idx)
        q1, _ = np.linalg.qr(rng.standard_normal((l, l)))
        q2, _ = np.linalg.qr(rng.standard_normal((l, l)))
        w = (q1 * np.geomspace(1e3, 1e-3, l)) @ q2
        cases.append((rng.standard_normal((m, l)), w,
                      rng.standard_normal((l, n)), r))
    # rank-deficient outer factors
    rng = np.random.default_rng(82_000)
    a = rng.standard_normal((30, 7))
    a[:, -1] = a[:, 0]
    cases.append((a, rng.standard_normal((7, 5)),
                  rng.standard_normal((5, 25)), 4))
    rng = np.random.default_rng(82_001)
    b = rng.standard_normal((6, 22))
    b[-1] = b[0]
    cases.append((rng.standard_normal((28, 6)), rng.standard_normal((6, 6)),
                  b, 3))
    rng = np.random.default_rng(82_002)
    a = rng.standard_normal((50, 9))
    a[:, -1] = 2.0 * a[:, 1]
    b = rng.standard_normal((7, 40))
    b[-1] = -b[2]
    cases.append((a, rng.standard_normal((9, 7)), b, 6))
    return cases


def test_criterion_07_conversion_cost_and_error(capsys):
    worst_flop_ratio = 0.0
    worst_margin = -np.inf
    cases = _conversion_corpus()
    for a, w, b, r in cases:
        m, l = a.shape
        k, n = b.shape
        flops = FlopCounter()
        out = lra_to_topsvd(a, w, b, r, flops=flops)
        budget = 20 * (m * l * l + n * k * k)
        worst_flop_ratio = max(worst_flop_ratio, flops.total / budget)
        product = (a @ w) @ b
        tau = tail_norm(np.linalg.svd(product, compute_uv=False), r)
        err = fro_norm(out.matrix() - product)
        bound = tau + 1e-8 * fro_norm(product)
        worst_margin = max(worst_margin, err - bound)
        assert flops.total <= budget
        assert err <= bound
    ok = worst_flop_ratio <= 1.0 and worst_margin <= 0.0
    _report(capsys, f"[criterion 07] {'PASS' if ok else 'FAIL'} — "
                    f"{len(cases)} conversions: worst flops/budget "
                    f"{worst_flop_ratio:.3f} (<= 1), worst error margin "
                    f"{worst_margin:.2e} (<= 0)")
    assert ok


# ---------------------------------------------------------------------------
# criterion 8: adversarial indicator sweep at bounded read fraction
# ---------------------------------------------------------------------------


def test_criterion_08_adversarial_sweep(capsys):
    m = n = 16
    # pure masked reader: failures are exactly the unread positions
    fail_mask, per_mask = adversarial_sweep(
        m, n, {"kind": "mask", "fraction": 0.25}, budget=0.25)
    unseen_mask = sum(not row["seen"] for row in per_mask) / (m * n)
    assert fail_mask == unseen_mask == 0.75
    for row in per_mask:
        assert row["failed"] == (not row["seen"])
    # sampling sketch pipeline under the same budget
    pipeline = {"kind": "nystrom", "f": {"family": "sample"},
                "h": {"family": "sample"}, "k": 2, "l": 2, "rho": 1}
    fail_ny, per_ny = adversarial_sweep(m, n, pipeline, budget=0.25)
    unseen_ny = sum(not row["seen"] for row in per_ny) / (m * n)
    assert fail_ny >= 0.4
    assert all(row["failed"] for row in per_ny if not row["seen"])
    assert fail_ny >= unseen_ny
    _report(capsys, f"[criterion 08] PASS — mask: fail == unseen == 0.75 "
                    f"exactly; sample sketch: fail {fail_ny:.4f} >= 0.4 "
                    f"with unseen {unseen_ny:.4f} all failing")


# ---------------------------------------------------------------------------
# criterion 9: residual refinement and homotopy continuation
# ---------------------------------------------------------------------------


def _geodesic_start(rng, truth, rel):
    """Rotate both factors so the start sits at exactly ``rel`` error."""
    alpha = float(np.arcsin(rel / np.sqrt(2.0)))

    def rotate(b):
        g = rng.standard_normal(b.shape)
        g -= b @ (b.T @ g)
        q, _ = np.linalg.qr(g)
        return b * np.cos(alpha) + q * np.sin(alpha)

    return TopSVD(U=rotate(truth.U), sigma=truth.sigma.copy(),
                  V=rotate(truth.V))


def test_criterion_09_refinement_and_homotopy(capsys):
    rho, size = 4, 64
    k, l = 4 * rho + 2, 2 * rho + 1
    sigma = geometric_spectrum(rho)
    decreases = 0
    homotopy_wins = 0
    trials = 100
    for i in range(trials):
        rng = np.random.default_rng(1000 + i)
        u, _ = np.linalg.qr(rng.standard_normal((size, rho)))
        v, _ = np.linalg.qr(rng.standard_normal((size, rho)))
        a = (u * sigma) @ v.T
        truth = TopSVD(U=u, sigma=sigma.copy(), V=v)
        start = _geodesic_start(rng, truth, 0.1)
        assert abs(_rel_err(start.matrix(), a) - 0.1) < 1e-12
        f = gen_gaussian(k, size, 2000 + i)
        h = gen_gaussian(size, l, 3000 + i)

        direct = MatrixOracle(a)
        state = init_refine_state(direct, start, rho, f=f, h=h, seed=4000 + i)
        refine_residual(direct, state)
        e_direct = _rel_err(state.current.matrix(), direct.audit())
        decreases += e_direct < 0.1

        pathed = MatrixOracle(a)
        final = homotopy_refine(pathed, start, rho, recipe="residual",
                                f=f, h=h, seed=4000 + i)
        e_homotopy = _rel_err(final.current.matrix(), pathed.audit())
        homotopy_wins += e_homotopy <= e_direct
    ok = decreases >= 80 and homotopy_wins >= 70
    _report(capsys, f"[criterion 09] {'PASS' if ok else 'FAIL'} — one "
                    f"residual pass decreased the error in {decreases}/100 "
                    f"(>= 80); homotopy final <= direct final in "
                    f"{homotopy_wins}/100 (>= 70)")
    assert decreases >= 80
    assert homotopy_wins >= 70


# ---------------------------------------------------------------------------
# criterion 10: byte-identical records modulo wall time
# ---------------------------------------------------------------------------


def _canonical_record(config):
    record = run(load_config(json.loads(json.dumps(config))))
    d = record.to_dict()
    for t in d["trials"]:
        t.pop("wall_time_s", None)
    d["aggregates"].pop("wall_time_s", None)
    return json.dumps(d, indent=2, sort_keys=True)


def test_criterion_10_deterministic_records(capsys):
    configs = [
        {
            "schema_version": 1,
            "input": {"family": "dual_random", "m": 32, "n": 32, "rho": 3,
                      "spectrum": [1.0, 0.5, 0.25], "noise": 1e-3},
            "pipeline": {"rho": 3,
                         "f": {"family": "abridged_hadamard", "d": 2},
                         "h": {"family": "abridged_hadamard", "d": 2}},
            "trials": 4,
            "budget": 1.0,
            "master_seed": 7,
            "jobs": 2,
        },
        {
            "schema_version": 1,
            "input": {"family": "dual_random", "m": 24, "n": 20, "rho": 2,
                      "spectrum": [1.0, 0.4], "noise": 1e-4},
            "pipeline": {"rho": 2, "homotopy": True,
                         "refine": {"recipe": "residual"}, "max_steps": 6},
            "trials": 3,
            "master_seed": 11,
            "jobs": 1,
        },
    ]
    for config in configs:
        first = _canonical_record(config)
        second = _canonical_record(config)
        assert first == second, "records differ between identical runs"
    _report(capsys, f"[criterion 10] PASS — {len(configs)} configs, two runs "
                    f"each: byte-identical JSON records modulo wall time")
