"""Acceptance suite: one test per criterion, each printing a pass line.

Every tolerance here is pinned; run with ``pytest tests/test_acceptance.py -v``
(or ``-s`` to see the per-criterion lines immediately).
"""

import time

import numpy as np
import pytest

from tsd import linalg, procrustes, verify
from tsd.bench import run_instance_pair
from tsd.cli import cli_main
from tsd.manifolds import Euclidean, Objective, Orthogonal, Product, Stiefel, Tangent
from tsd.selection import (
    givens_rule,
    matching_partition,
    product_rule,
    randomized_stiefel_rule,
    singleton_partition,
)
from tsd.solver import (
    Backtracking,
    ExactGivens,
    FixedInverseL,
    SolverConfig,
    givens_exact_linesearch,
    rgd_run,
    step_fixed,
    tsd_run,
)
from tsd.verify import (
    DecreaseConstants,
    adversarial_projections,
    check_gap_orthogonal,
    counterexample_deterministic,
    counterexample_randomized,
    decrease_audit,
    gap_radius,
    predicted_counterexample_values,
    stacked_projection_matrix,
)

from oracles import grid_min_trace, taylor_expm


def report(num, text):
    print(f"PASS criterion {num}: {text}")


def test_c01_counterexample_fidelity():
    start = time.perf_counter()
    rng = np.random.default_rng(2026)
    worst_dev = 0.0
    min_growth = np.inf
    for n in (3, 5, 10):
        x0 = rng.standard_normal(n)
        for kind in ("deterministic", "randomized"):
            if kind == "deterministic":
                trace, rep = counterexample_deterministic(n, x0, 40)
            else:
                trace, rep = counterexample_randomized(n, x0, 40, seed=n)
            pred = predicted_counterexample_values(trace.f[0], 40)
            dev = float(np.max(np.abs(np.array(trace.f) - pred)))
            worst_dev = max(worst_dev, dev)
            assert dev <= 1e-9, (kind, n, dev)
            growth = rep.ratios[39] / rep.ratios[4]
            min_growth = min(min_growth, growth)
            assert growth >= 10.0, (kind, n, growth)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"runtime {elapsed:.2f}s"
    report(1, f"max |f - eps(1+2^-t)| = {worst_dev:.2e}, min ratio growth = {min_growth:.0f}x, {elapsed:.2f}s")


def test_c02_givens_kernel_against_taylor_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 21))
        perm = rng.permutation(n)
        pairs = []
        c = np.zeros((n, n))
        for a in range(0, n - 1, 2):
            i, j = sorted((int(perm[a]), int(perm[a + 1])))
            ang = float(rng.uniform(-np.pi, np.pi))
            pairs.append((i, j, ang))
            c += ang * linalg.pair_matrix(i, j, n)
        worst = max(worst, float(np.linalg.norm(linalg.expm_givens(pairs, n) - taylor_expm(c))))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-12
    assert elapsed < 5.0, f"runtime {elapsed:.2f}s"
    report(2, f"max Frobenius deviation from Taylor oracle = {worst:.2e} over 1000 inputs, {elapsed:.2f}s")


def test_c03_transport_isometry():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 21))
        man = Orthogonal(n)
        y = man.random_point(rng)
        d = man.random_tangent(y, rng)
        u = man.random_tangent(y, rng)
        v = man.random_tangent(y, rng)
        before = man.metric(y, u, v)
        gu = man.transport(y, d, u)
        gv = man.transport(y, d, v)
        after = float(np.sum(gu.coeff * gv.coeff))
        worst = max(worst, abs(after - before))
    assert worst <= 1e-10
    report(3, f"max |<Gu,Gv> - <u,v>| = {worst:.2e} over 1000 seeded triples")


def test_c04_gap_theorem():
    rng = np.random.default_rng(4)
    worst_margin = np.inf
    for beta in (0.5, 0.9, 0.99):
        radius = gap_radius(beta)
        for _ in range(1000):
            n = int(rng.integers(4, 9))
            partition = singleton_partition(n) if rng.integers(2) else matching_partition(n)
            disps = []
            for _blk in range(partition.block_count):
                c = linalg.random_skew(n, rng)
                c *= rng.uniform(0.0, 1.0) * radius / np.linalg.norm(c)
                disps.append(c)
            rep = check_gap_orthogonal(partition, disps, beta)
            assert all(rep.radius_ok)
            assert rep.passed, (beta, n)
            worst_margin = min(worst_margin, rep.min_trace - beta)
    assert worst_margin >= -1e-10
    report(4, f"3000 seeded (partition, displacement, beta) triples pass; min cosine margin = {worst_margin:.2e}")


def test_c05_adversarial_span_collapse():
    for n in (4, 6, 10):
        projections, c = adversarial_projections(n, (0, 1), (2, 3))
        e = linalg.expm_skew(c / 2.0)
        moved = e.T @ linalg.pair_matrix(2, 3, n) @ e
        assert np.linalg.norm(moved - linalg.pair_matrix(0, 1, n)) <= 1e-12
        man = Orthogonal(n)
        stacked = stacked_projection_matrix(man, np.eye(n), projections)
        sigma_min = float(np.linalg.svd(stacked, compute_uv=False)[-1])
        assert sigma_min < 1e-10, (n, sigma_min)
    report(5, "conjugation identity within 1e-12 and span collapse detected for n in {4, 6, 10}")


def test_c06_stiefel_randomized_rule():
    start = time.perf_counter()
    n, p, samples = 8, 3, 100_000
    man = Stiefel(n, p)
    rng = np.random.default_rng(6)
    u = man.random_point(rng)
    rule = randomized_stiefel_rule(man, seed=60)
    worst_z = 0.0
    for _ in range(20):
        w = man.random_tangent(u, rng)
        w = w.scale(1.0 / man.norm(u, w))
        a = linalg.skew_part(u.T @ w.coeff)
        kernel = w.coeff - u @ (u.T @ w.coeff)
        probs = rule.probabilities
        npairs = len(rule.pairs)
        expected = sum(probs[o] * a[i, j] ** 2 for o, (i, j) in enumerate(rule.pairs))
        expected += sum(
            probs[npairs + l] * float(kernel[:, l] @ kernel[:, l]) / (n - p) for l in range(p)
        )
        vals = rule.projection_energy_samples(u, w, samples, rng)
        se = float(vals.std(ddof=1) / np.sqrt(samples))
        z = abs(float(vals.mean()) - expected) / max(se, 1e-300)
        worst_z = max(worst_z, z)
        assert z <= 3.0
    rep = verify.estimate_randomized_constant(rule, u, samples, probes=20, seed=61)
    c2_theory = rule.c_squared
    assert c2_theory == pytest.approx(min(1.0 / 6.0, (1.0 / 6.0) / (n - p)))
    assert rep.c_squared_hat >= c2_theory - 3.0 * max(rep.probe_standard_errors)
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"runtime {elapsed:.2f}s"
    report(6, f"20 probes within 3 SE (max z = {worst_z:.2f}); C^2_hat = {rep.c_squared_hat:.4f} "
              f">= {c2_theory:.4f} - 3 SE; {elapsed:.1f}s")


def test_c07_exact_line_search_vs_grid():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 11))
        g = rng.standard_normal((n, n)) * float(rng.uniform(0.5, 4.0))
        i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
        _, value, _ = givens_exact_linesearch(g, i, j)
        grid = grid_min_trace(g, i, j, points=100_000)
        worst = max(worst, abs(value - grid))
    assert worst <= 1e-6
    report(7, f"max |closed form - grid search| = {worst:.2e} over 100 seeded inputs")


def test_c08_bcd_recovery():
    rng = np.random.default_rng(8)
    n, blocks = 20, 4
    w = rng.standard_normal((n, n))
    q = w.T @ w + n * np.eye(n)
    b = rng.standard_normal(n)
    slices = np.split(np.arange(n), blocks)
    l_blocks = [float(np.linalg.eigvalsh(q[np.ix_(s, s)])[-1]) for s in slices]
    man = Product([Euclidean(n // blocks) for _ in range(blocks)])
    obj = Objective(
        eval=lambda x: 0.5 * float(np.concatenate(x) @ q @ np.concatenate(x))
        + float(b @ np.concatenate(x)),
        euclidean_gradient=lambda x: tuple(np.split(q @ np.concatenate(x) + b, blocks)),
        block_constants=l_blocks,
    )
    x0_flat = rng.standard_normal(n)
    cfg = SolverConfig(
        rule=product_rule(man),
        policy=FixedInverseL(),
        max_outer_iterations=100,
        gradient_norm_tolerance=0.0,
    )
    x, _ = tsd_run(man, obj, tuple(np.split(x0_flat.copy(), blocks)), cfg)

    x_ref = x0_flat.copy()
    for _ in range(100):
        for k, s in enumerate(slices):
            grad = q @ x_ref + b
            x_ref[s] = x_ref[s] - grad[s] / l_blocks[k]
    err = float(np.max(np.abs(np.concatenate(x) - x_ref)))
    assert err <= 1e-14
    report(8, f"100 outer iterations match the independent cyclic BCD oracle to {err:.1e}")


def test_c09_sufficient_decrease_audit():
    n = 20
    inst = procrustes.gen_instance(n, 9)
    obj = procrustes.trace_objective(inst.d)
    man = Orthogonal(n)
    cfg = SolverConfig(
        rule=givens_rule(man, singleton_partition(n)),
        policy=FixedInverseL(),
        max_outer_iterations=40,
        gradient_norm_tolerance=1e-12,
        monitor_decrease=True,
    )
    _, trace = tsd_run(man, obj, np.eye(n), cfg)
    min_residual = min(r for row in trace.residuals for r in row)
    assert min_residual >= -1e-9
    audit = decrease_audit(
        trace,
        DecreaseConstants(
            block_constants=obj.smoothness_constant,
            smoothness_constant=obj.smoothness_constant,
        ),
        slack=1e-9,
    )
    assert audit.passed

    _, gd_trace = rgd_run(man, obj, np.eye(n), SolverConfig(policy=Backtracking(), max_outer_iterations=150))
    strict = all(a > b for a, b in zip(gd_trace.f, gd_trace.f[1:]))
    assert strict
    report(9, f"all {sum(len(r) for r in trace.residuals)} TSD inner steps satisfy block decrease "
              f"(min residual {min_residual:.1e}); {gd_trace.cycles} GD steps strictly decrease f")


def test_c10_sparse_update_and_flop_scaling():
    # (a) a Givens inner step touches exactly two columns, bit for bit
    n = 20
    inst = procrustes.gen_instance(n, 10)
    obj = procrustes.trace_objective(inst.d)
    man = Orthogonal(n)
    rule = givens_rule(man, singleton_partition(n))
    y = linalg.random_orthogonal(n, 1)
    k = 33
    (i, j) = rule.partition.blocks[k][0]
    y_new = step_fixed(man, obj, y, rule.projection(y, k), obj.smoothness_constant)
    untouched = [c for c in range(n) if c not in (i, j)]
    assert all(np.array_equal(y[:, c], y_new[:, c]) for c in untouched)
    assert not np.array_equal(y[:, i], y_new[:, i])

    # (b) counted flops per sweep scale as n * n(n-1)/2 within a factor of 2
    ratios = []
    for n in (20, 40, 80):
        inst = procrustes.gen_instance(n, 10)
        obj = procrustes.trace_objective(inst.d)
        man = Orthogonal(n)
        cfg = SolverConfig(
            rule=givens_rule(man, singleton_partition(n)),
            policy=ExactGivens(),
            max_outer_iterations=1,
            gradient_norm_tolerance=0.0,
        )
        _, trace = tsd_run(man, obj, np.eye(n), cfg)
        ratios.append(trace.flops[-1] / (n * (n * (n - 1) / 2)))
    assert max(ratios) <= 2.0 * min(ratios)
    report(10, f"two-column updates bit-identical; per-sweep flop ratios {ratios} within factor 2")


def test_c11_figure1_qualitative_reproduction():
    start = time.perf_counter()
    tsd_at10, gd_at10, wins = [], [], 0
    for i in range(10):
        rec = run_instance_pair(50, 7 + i, max_cycles=1000, tol=1e-6)
        f0 = rec.f_tsd[0]
        denom = f0 - rec.f_best
        m_cycles = max(len(rec.f_tsd) - 1, len(rec.f_gd) - 1, 1)
        c10 = int(np.floor(0.10 * m_cycles + 1e-9))

        def gap(fs, c):
            return 100.0 * (f0 - fs[min(c, len(fs) - 1)]) / denom

        tsd_at10.append(gap(rec.f_tsd, c10))
        gd_at10.append(gap(rec.f_gd, c10))

        def cycles_to_99(fs):
            target = f0 - 0.99 * denom
            return next((c for c, f in enumerate(fs) if f <= target), 10**9)

        wins += cycles_to_99(rec.f_tsd) <= cycles_to_99(rec.f_gd)
    med_tsd, med_gd = float(np.median(tsd_at10)), float(np.median(gd_at10))
    elapsed = time.perf_counter() - start
    assert med_tsd >= med_gd, (med_tsd, med_gd)
    assert wins >= 8, wins
    assert elapsed < 300.0, f"runtime {elapsed:.1f}s"
    report(11, f"median gap at 10% cycles: TSD {med_tsd:.3f} >= GD {med_gd:.3f}; "
               f"TSD reaches 99% first on {wins}/10; {elapsed:.0f}s")


def test_c12_convergence_to_svd_optimum():
    n = 20
    inst = procrustes.gen_instance(n, 12, noise_scale=0.0)
    obj = procrustes.trace_objective(inst.d)
    man = Orthogonal(n)
    y_star, f_star = procrustes.svd_optimum(inst.d)
    x0 = np.eye(n)
    if np.linalg.det(y_star) < 0:  # start in the optimum's determinant component
        x0[0, 0] = -1.0
    cfg = SolverConfig(
        rule=givens_rule(man, singleton_partition(n)),
        policy=ExactGivens(),
        max_outer_iterations=500,
        gradient_norm_tolerance=0.0,
    )
    x, trace = tsd_run(man, obj, x0, cfg)
    rel = abs(trace.f[-1] - f_star) / abs(f_star)
    assert rel <= 1e-6, rel
    first = next(
        (c for c, f in enumerate(trace.f) if abs(f - f_star) / abs(f_star) <= 1e-6), None
    )
    report(12, f"relative error {rel:.2e} vs the closed-form optimum (reached at cycle {first} of 500)")


def test_c13_benchmark_determinism(tmp_path):
    args = ["bench", "--n", "16", "--instances", "2", "--seeds", "5",
            "--max-cycles", "40", "--no-plot"]
    assert cli_main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli_main(args + ["--out", str(tmp_path / "b")]) == 0
    csv_a = (tmp_path / "a" / "resn16.csv").read_bytes()
    csv_b = (tmp_path / "b" / "resn16.csv").read_bytes()
    assert csv_a == csv_b
    log_a = tmp_path / "a" / "resn16.log"
    log_b = tmp_path / "b" / "resn16.log"
    assert log_a.exists() == log_b.exists()
    if log_a.exists():
        assert log_a.read_bytes() == log_b.read_bytes()
    report(13, f"reruns byte-identical ({len(csv_a)} bytes)")


def test_c00_cli_verify_exits_zero(capsys):
    # CLI contract: `verify` on a correct build exits 0 and prints pass lines
    rc = cli_main(["verify", "--seeds", "0"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.count("PASS") >= 12 and "FAIL" not in out
    report(0, "CLI verify battery exits 0 with all checks passing")
