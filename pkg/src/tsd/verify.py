"""Numerical verification: divergence counterexamples and bound checks.

This module turns the convergence theory's load-bearing inequalities into
executable checks:

* two explicit selection-rule constructions on R^n that satisfy the naive
  spanning conditions yet stall at ``f = eps``, with the norm-equivalence
  ratio diverging;
* the gap condition for transported Givens decompositions on the orthogonal
  group (cosine bound + operator-norm distance bound);
* the adversarial displacement that collapses the span of a transported
  decomposition at finite distance;
* Monte Carlo estimation of the randomized-rule norm constant;
* a posteriori audits of recorded solver traces against the sufficient
  decrease inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .manifolds import Manifold, Orthogonal, Tangent
from .selection import (
    GivensPartition,
    RandomizedRule,
    SubspaceProjection,
    rank_one_projection,
)
from .solver import IterationTrace

SPAN_SIGMA_TOL = 1e-12


# ---------------------------------------------------------------------------
# seminorm and norm equivalence
# ---------------------------------------------------------------------------


def seminorm(manifold: Manifold, v: Tangent, projections) -> float:
    """``sqrt(sum_k ||P_k v||^2)``; a norm iff the images span the tangent space."""
    total = 0.0
    for proj in projections:
        pv = proj.apply(v)
        total += manifold.metric(v.base, pv, pv)
    return float(np.sqrt(max(total, 0.0)))


def stacked_projection_matrix(manifold: Manifold, x, projections) -> np.ndarray:
    """Vertically stacked projection operators in an orthonormal frame."""
    d = manifold.dim
    rows = []
    for proj in projections:
        mat = np.empty((d, d))
        for b in range(d):
            e = np.zeros(d)
            e[b] = 1.0
            mat[:, b] = manifold.frame_coords(x, proj.apply(manifold.frame_tangent(x, e)))
        rows.append(mat)
    return np.vstack(rows)


def norm_equiv_ratio(manifold: Manifold, x, projections) -> float:
    """``sup_v ||v|| / ||v||_P`` = 1/sigma_min of the stacked operator.

    Returns ``inf`` when the smallest singular value is below 1e-12, i.e.
    when the projection images fail to span the tangent space.
    """
    stacked = stacked_projection_matrix(manifold, x, projections)
    sigma_min = float(np.linalg.svd(stacked, compute_uv=False)[-1])
    if sigma_min < SPAN_SIGMA_TOL:
        return math.inf
    return 1.0 / sigma_min


@dataclass
class NormEquivalenceReport:
    """Per-iteration norm-equivalence diagnostics of a selection rule."""

    ratios: list = field(default_factory=list)
    sigma_mins: list = field(default_factory=list)
    spanning: list = field(default_factory=list)
    block_norms: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# divergence counterexamples
# ---------------------------------------------------------------------------

MAX_COUNTEREXAMPLE_T = 50  # beyond this, 2^-t underflows the verification tolerance


def _unit_slice_vectors(y: np.ndarray, inner_target: float) -> np.ndarray:
    """n unit vectors v with <v, y> = inner_target, spanning R^n.

    With ``yhat = y/||y||`` and ``alpha = inner_target/||y||`` (< 1 here), the
    slice is ``alpha*yhat + sqrt(1-alpha^2)*w`` over unit ``w`` orthogonal to
    ``yhat``.  Taking w over an orthonormal basis of the complement, plus one
    repeat with flipped sign, spans R^n whenever alpha > 0.  Rows are the
    vectors.
    """
    n = y.shape[0]
    ny = float(np.linalg.norm(y))
    alpha = inner_target / ny
    if not 0.0 < alpha < 1.0:
        raise ValueError("slice parameter out of range; construction needs 0 < alpha < 1")
    beta = float(np.sqrt(1.0 - alpha**2))
    yhat = y / ny
    comp = linalg.orth_complement_basis(yhat.reshape(n, 1))  # n x (n-1)
    vs = np.empty((n, n))
    for i in range(n - 1):
        vs[i] = alpha * yhat + beta * comp[:, i]
    vs[n - 1] = alpha * yhat - beta * comp[:, 0]
    return vs


def counterexample_randomized(n: int, x0: np.ndarray, T: int, seed=None):
    """Stalling randomized rule on ``f(x) = ||x||^2 / 2`` over R^n.

    Each iteration projects onto one of n unit vectors drawn uniformly from
    the slice ``<v, x> = sqrt(f(x) - eps)`` with ``eps = f(x0)/2`` and steps
    with stepsize 1.  Every draw gives the same decrease, so
    ``f(x^t) = eps (1 + 2^-t)`` exactly, while the expected projection energy
    of the limit direction collapses and the norm-equivalence ratio diverges.

    Returns ``(IterationTrace, NormEquivalenceReport)``.
    """
    x0 = np.asarray(x0, dtype=float)
    _check_counterexample_args(n, x0, T)
    rng = np.random.default_rng(seed)
    eps = 0.25 * float(x0 @ x0)  # f(x0)/2
    x = x0.copy()
    trace = IterationTrace()
    report = NormEquivalenceReport()
    trace.record_point(0.5 * float(x @ x), float(np.linalg.norm(x)), 0.0)
    for _ in range(T):
        f_x = 0.5 * float(x @ x)
        vs = _unit_slice_vectors(x, np.sqrt(f_x - eps))
        # ratio of ||v|| to sqrt(E ||P_t v||^2): stacked rows v_i / sqrt(n)
        sigma_min = float(np.linalg.svd(vs / np.sqrt(n), compute_uv=False)[-1])
        report.sigma_mins.append(sigma_min)
        report.spanning.append(sigma_min > SPAN_SIGMA_TOL)
        report.ratios.append(math.inf if sigma_min < SPAN_SIGMA_TOL else 1.0 / sigma_min)
        report.block_norms.append([abs(float(v @ x)) for v in vs])
        v = vs[rng.integers(n)]
        x = x - float(v @ x) * v
        trace.cycles += 1
        trace.stepsizes.append([1.0])
        trace.record_point(0.5 * float(x @ x), float(np.linalg.norm(x)), 0.0)
    return trace, report


def counterexample_deterministic(n: int, x0: np.ndarray, T: int):
    """Stalling deterministic rule on ``f(x) = ||x||^2 / 2`` with m = n blocks.

    The inner loop picks, at step k, a unit vector on the slice
    ``<v, y^{k-1}> = sqrt((f(x^{t-1}) - eps)/m)`` that grows the span of the
    vectors picked so far, then steps onto the slice's zero set.  The inner
    objective values follow ``f(y^k) = ((2m-k) f(x^{t-1}) + k eps) / (2m)``
    and the outer values follow ``f(x^t) = eps (1 + 2^-t)``, yet the picked
    directions cluster and the norm-equivalence ratio diverges.

    Returns ``(IterationTrace, NormEquivalenceReport)``; the trace's
    block_norms rows hold the per-inner-step objective values for the
    recursion check.
    """
    x0 = np.asarray(x0, dtype=float)
    _check_counterexample_args(n, x0, T)
    m = n
    eps = 0.25 * float(x0 @ x0)
    x = x0.copy()
    trace = IterationTrace()
    report = NormEquivalenceReport()
    trace.record_point(0.5 * float(x @ x), float(np.linalg.norm(x)), 0.0)
    for _ in range(T):
        f_outer = 0.5 * float(x @ x)
        target = np.sqrt((f_outer - eps) / m)
        y = x.copy()
        picked = np.zeros((m, n))
        basis: list[np.ndarray] = []  # orthonormalized picks, for the rank test
        inner_f = []
        for k in range(m):
            candidates = _unit_slice_vectors(y, target)
            v = None
            for cand in candidates:
                resid = cand.copy()
                for b in basis:
                    resid -= (b @ cand) * b
                if np.linalg.norm(resid) > 1e-8:
                    v = cand
                    basis.append(resid / np.linalg.norm(resid))
                    break
            if v is None:  # cannot happen: the n candidates span R^n
                raise RuntimeError("no span-growing candidate found")
            picked[k] = v
            y = y - float(v @ y) * v
            inner_f.append(0.5 * float(y @ y))
        sigma_min = float(np.linalg.svd(picked, compute_uv=False)[-1])
        report.sigma_mins.append(sigma_min)
        report.spanning.append(sigma_min > SPAN_SIGMA_TOL)
        report.ratios.append(math.inf if sigma_min < SPAN_SIGMA_TOL else 1.0 / sigma_min)
        report.block_norms.append(inner_f)
        x = y
        trace.cycles += 1
        trace.stepsizes.append([1.0] * m)
        trace.record_point(0.5 * float(x @ x), float(np.linalg.norm(x)), 0.0)
    return trace, report


def _check_counterexample_args(n, x0, T):
    if n < 2:
        raise ValueError("need n >= 2")
    if x0.shape != (n,):
        raise ValueError(f"x0 must have shape ({n},)")
    if not np.any(x0):
        raise ValueError("x0 must be nonzero")
    if T > MAX_COUNTEREXAMPLE_T:
        raise ValueError(f"T > {MAX_COUNTEREXAMPLE_T}: 2^-t underflows the verification tolerance")


def predicted_counterexample_values(f0: float, T: int) -> np.ndarray:
    """The stall recursion ``f(x^t) = eps (1 + 2^-t)`` with ``eps = f0/2``."""
    eps = 0.5 * f0
    return eps * (1.0 + np.power(2.0, -np.arange(T + 1, dtype=float)))


# ---------------------------------------------------------------------------
# gap condition on the orthogonal group
# ---------------------------------------------------------------------------


def gap_radius(beta: float) -> float:
    """Displacement radius ``2 log(1 + sqrt(1 - beta))`` for cosine bound beta."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must be in (0, 1)")
    return 2.0 * math.log(1.0 + math.sqrt(1.0 - beta))


@dataclass
class GapReport:
    """Result of checking the transported-decomposition gap condition."""

    beta: float
    radius: float
    block_mins: list
    radius_ok: list
    op_distances: list
    op_bound: float
    passed: bool

    @property
    def min_trace(self) -> float:
        checked = [v for v, ok in zip(self.block_mins, self.radius_ok) if ok]
        return min(checked) if checked else math.inf


def check_gap_orthogonal(partition: GivensPartition, displacements, beta: float) -> GapReport:
    """Check the transported Givens decomposition against the gap condition.

    For each block with displacement ``C_k`` (the inner iterate's offset from
    the sweep start) and each normalized basis element ``A = H_ij/sqrt(2)``,
    computes ``trace(A^T expm(C_k/2)^T A expm(C_k/2))``; within the radius
    ``2 log(1 + sqrt(1-beta))`` this cosine is at least ``beta``.  Also
    verifies the operator-norm distance between the transported and reference
    block projections against the principal-angle bound
    ``|block| * sqrt(1 - beta^2)``.

    Blocks whose displacement exceeds the radius are flagged (``radius_ok``
    False) and excluded from the pass criterion rather than rejected.
    """
    n = partition.n
    if len(displacements) != partition.block_count:
        raise ValueError("need one displacement per block")
    radius = gap_radius(beta)
    sqrt2 = np.sqrt(2.0)
    d = n * (n - 1) // 2
    pair_index = {pair: a for a, pair in enumerate(linalg.strict_upper_pairs(n))}
    triu = np.triu_indices(n, k=1)

    block_mins = []
    radius_ok = []
    op_distances = []
    for block, c in zip(partition.blocks, displacements):
        c = linalg.require_skew(np.asarray(c, dtype=float))
        if c.shape != (n, n):
            raise ValueError("displacement dimension mismatch")
        radius_ok.append(float(np.linalg.norm(c)) <= radius + 1e-12)
        e_half = linalg.expm_skew(c / 2.0)
        cosines = []
        transported_coords = []
        for i, j in block:
            a = linalg.pair_matrix(i, j, n) / sqrt2
            moved = e_half.T @ a @ e_half
            cosines.append(float(np.sum(a * moved)))
            transported_coords.append(sqrt2 * moved[triu])  # frame coordinates
        block_mins.append(min(cosines))
        # operator-norm distance between transported and reference projections
        u = np.array(transported_coords)  # rows orthonormal in frame coords
        p_moved = u.T @ u
        p_ref = np.zeros((d, d))
        for i, j in block:
            p_ref[pair_index[(i, j)], pair_index[(i, j)]] = 1.0
        op_distances.append(float(np.linalg.norm(p_moved - p_ref, ord=2)))

    op_bound = max(len(b) for b in partition.blocks) * math.sqrt(max(0.0, 1.0 - beta**2))
    passed = all(
        (not ok) or (bm >= beta - 1e-10 and od <= op_bound + 1e-8)
        for bm, od, ok in zip(block_mins, op_distances, radius_ok)
    )
    return GapReport(
        beta=beta,
        radius=radius,
        block_mins=block_mins,
        radius_ok=radius_ok,
        op_distances=op_distances,
        op_bound=op_bound,
        passed=passed,
    )


# ---------------------------------------------------------------------------
# adversarial displacement (span collapse at finite distance)
# ---------------------------------------------------------------------------


def adversarial_displacement(n: int, pair: tuple, other: tuple) -> np.ndarray:
    """The displacement ``C = pi (H_{i i'} + H_{j j'})`` collapsing a span.

    Conjugating ``H_{i'j'}`` by ``expm(C/2)`` lands exactly on ``H_{ij}``, so
    a transported singleton decomposition loses a dimension: two blocks end
    up projecting onto the same plane.  Indices must be pairwise distinct.
    """
    i, j = pair
    ip, jp = other
    idx = (i, j, ip, jp)
    if len(set(idx)) != 4 or any(not 0 <= a < n for a in idx):
        raise ValueError("need four pairwise distinct indices within range")
    c = np.pi * (linalg.pair_matrix(i, ip, n) + linalg.pair_matrix(j, jp, n))
    e_half = linalg.expm_skew(c / 2.0)
    moved = e_half.T @ linalg.pair_matrix(ip, jp, n) @ e_half
    err = float(np.linalg.norm(moved - linalg.pair_matrix(i, j, n)))
    if err > 1e-12:
        raise AssertionError(f"conjugation identity violated: {err:.3e}")
    return c


def adversarial_projections(n: int, pair: tuple, other: tuple):
    """Transported singleton-pair projections at Y0 = I with the collapse.

    Every block keeps its reference projection except the ``other`` block,
    which is transported by the adversarial displacement; returns the list of
    projections (for ``norm_equiv_ratio``) and the displacement.
    """
    c = adversarial_displacement(n, pair, other)
    e_half = linalg.expm_skew(c / 2.0)
    manifold = Orthogonal(n)
    y0 = np.eye(n)
    projections = []
    for i, j in linalg.strict_upper_pairs(n):
        h = linalg.pair_matrix(i, j, n)
        coeff = e_half.T @ h @ e_half if (i, j) == tuple(other) else h
        projections.append(
            rank_one_projection(manifold, y0, Tangent(y0, coeff), {"kind": "adversarial"})
        )
    return projections, c


# ---------------------------------------------------------------------------
# randomized norm constant estimation
# ---------------------------------------------------------------------------


@dataclass
class RandomizedConstantReport:
    c_squared_hat: float
    probe_means: list
    probe_standard_errors: list
    samples_per_probe: int

    @property
    def worst_probe(self) -> int:
        return int(np.argmin(self.probe_means))


def estimate_randomized_constant(
    rule: RandomizedRule, x, samples: int, probes: int, seed
) -> RandomizedConstantReport:
    """Monte Carlo lower bound on the randomized norm constant.

    For each of ``probes`` random unit tangent vectors v, estimates
    ``E ||P v||^2``; the estimated constant is the minimum over probes.
    Standard errors are per-probe sample standard deviations of ``||P v||^2``
    scaled by ``1/sqrt(samples)``.
    """
    if not isinstance(rule, RandomizedRule):
        raise ValueError("estimation requires a randomized rule")
    manifold = rule.manifold
    rng = np.random.default_rng(seed)
    means, ses = [], []
    for _ in range(probes):
        v = manifold.random_tangent(x, rng)
        nv = manifold.norm(x, v)
        while nv < 1e-12:
            v = manifold.random_tangent(x, rng)
            nv = manifold.norm(x, v)
        v = v.scale(1.0 / nv)
        if hasattr(rule, "projection_energy_samples"):
            vals = rule.projection_energy_samples(x, v, samples, rng)
        else:
            vals = np.empty(samples)
            for s in range(samples):
                pv = rule.draw(x).apply(v)
                vals[s] = manifold.metric(x, pv, pv)
        means.append(float(vals.mean()))
        ses.append(float(vals.std(ddof=1) / np.sqrt(samples)))
    return RandomizedConstantReport(
        c_squared_hat=float(min(means)),
        probe_means=means,
        probe_standard_errors=ses,
        samples_per_probe=samples,
    )


# ---------------------------------------------------------------------------
# trace audits
# ---------------------------------------------------------------------------


@dataclass
class DecreaseConstants:
    """Constants feeding the decrease audit.

    ``block_constants`` are the L_k used by the run (scalar allowed);
    ``smoothness_constant`` is L_f.  ``gamma`` and ``radius`` activate the
    small/large step classification; when ``sqrt(m) * gamma >= 1`` the
    small-step bound is vacuous and only flagged.
    """

    block_constants: object
    smoothness_constant: float
    gamma: float | None = None
    radius: float | None = None

    def l_k(self, k: int, m: int) -> float:
        c = self.block_constants
        return float(c[k]) if np.ndim(c) == 1 else float(c)

    def l_min_max(self, m: int):
        c = self.block_constants
        if np.ndim(c) == 1:
            return float(np.min(c)), float(np.max(c))
        return float(c), float(c)


@dataclass
class AuditReport:
    passed: bool
    violations: list
    iteration_class: list  # "small" | "large" | "" per outer iteration
    eta: float | None
    eta_prime: float | None
    vacuous_bound: bool


def decrease_audit(trace: IterationTrace, constants: DecreaseConstants, slack: float = 1e-9) -> AuditReport:
    """Audit a monitored trace against the sufficient decrease inequalities.

    Checks, per outer iteration, the summed block decrease
    ``f(y^0) - f(y^m) >= sum_k ||P_k grad f(y^{k-1})||^2 / (2 L_k)`` (for a
    randomized run this is the single-block per-realization bound), plus the
    per-step residuals recorded by the monitor.  When ``gamma`` and
    ``radius`` are set, iterations are classified small/large by the summed
    step lengths and checked against the corresponding decrease bounds.
    """
    if trace.cycles and not trace.block_norms:
        raise ValueError("trace is missing monitor data (run with record_trace/monitor_decrease)")
    violations = []
    classes = []
    t_count = trace.cycles
    eta = eta_prime = None
    vacuous = False
    if constants.gamma is not None and constants.radius is not None and t_count:
        m = max(len(b) for b in trace.block_norms)
        l_min, l_max = constants.l_min_max(m)
        l_f = constants.smoothness_constant
        denom = 1.0 - np.sqrt(m) * constants.gamma
        if denom <= 0.0:
            vacuous = True
        else:
            eta = l_min**2 * denom**2 / (4.0 * l_max * (l_min**2 + l_f**2 * (m - 1) * m))
        eta_prime = l_min * constants.radius**2 / (2.0 * m)
    for t in range(t_count):
        f_before, f_after = trace.f[t], trace.f[t + 1]
        norms = trace.block_norms[t]
        m = len(norms)
        lhs = f_before - f_after
        rhs = sum(n_k**2 / (2.0 * constants.l_k(k, m)) for k, n_k in enumerate(norms))
        if lhs < rhs - slack:
            violations.append((t, "block-decrease", lhs - rhs))
        if trace.residuals and t < len(trace.residuals):
            for k, r in enumerate(trace.residuals[t]):
                if r < -slack:
                    violations.append((t, f"inner-residual-{k}", r))
        if constants.gamma is not None and constants.radius is not None:
            total_len = sum(trace.step_lengths[t]) if t < len(trace.step_lengths) else 0.0
            if total_len <= constants.radius:
                classes.append("small")
                if eta is not None and lhs < eta * trace.grad_norm[t] ** 2 - slack:
                    violations.append((t, "small-step", lhs - eta * trace.grad_norm[t] ** 2))
            else:
                classes.append("large")
                if eta_prime is not None and lhs < eta_prime - slack:
                    violations.append((t, "large-step", lhs - eta_prime))
        else:
            classes.append("")
    return AuditReport(
        passed=not violations,
        violations=violations,
        iteration_class=classes,
        eta=eta,
        eta_prime=eta_prime,
        vacuous_bound=vacuous,
    )


# ---------------------------------------------------------------------------
# full verification battery (CLI `verify`)
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _taylor_expm(c: np.ndarray, terms: int = 30) -> np.ndarray:
    """Truncated Taylor series oracle for the matrix exponential."""
    out = np.eye(c.shape[0])
    term = np.eye(c.shape[0])
    for k in range(1, terms + 1):
        term = term @ c / k
        out = out + term
    return out


def _check(name, passed, detail) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def _check_counterexamples(seed) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_f = 0.0
    worst_growth = math.inf
    for n in (3, 5, 10):
        x0 = rng.standard_normal(n)
        for kind in ("deterministic", "randomized"):
            if kind == "deterministic":
                trace, report = counterexample_deterministic(n, x0, 40)
            else:
                trace, report = counterexample_randomized(n, x0, 40, seed=seed + n)
            pred = predicted_counterexample_values(trace.f[0], 40)
            worst_f = max(worst_f, float(np.max(np.abs(np.array(trace.f) - pred))))
            growth = report.ratios[39] / report.ratios[4]
            worst_growth = min(worst_growth, growth)
            if not all(report.spanning):
                return _check("counterexample-fidelity", False, f"{kind} n={n}: spanning flag false")
    ok = worst_f <= 1e-9 and worst_growth >= 10.0
    return _check(
        "counterexample-fidelity",
        ok,
        f"max |f - eps(1+2^-t)| = {worst_f:.2e}, min ratio growth t=40 vs t=5 = {worst_growth:.1f}x",
    )


def _check_givens_kernel(seed) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 21))
        idx = rng.permutation(n)
        pairs = []
        for a in range(0, n - 1, 2):
            i, j = sorted((int(idx[a]), int(idx[a + 1])))
            pairs.append((i, j, float(rng.uniform(-np.pi, np.pi))))
        q = linalg.expm_givens(pairs, n)
        c = np.zeros((n, n))
        for i, j, ang in pairs:
            c += ang * linalg.pair_matrix(i, j, n)
        worst = max(worst, float(np.linalg.norm(q - _taylor_expm(c))))
    return _check("givens-kernel", worst <= 1e-12, f"max |expm_givens - taylor| = {worst:.2e}")


def _check_transport_isometry(seed) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 21))
        man = Orthogonal(n)
        y = man.random_point(rng)
        d = man.random_tangent(y, rng)
        u = man.random_tangent(y, rng)
        v = man.random_tangent(y, rng)
        before = man.metric(y, u, v)
        target = man.exp(y, d)
        gu = man.transport(y, d, u)
        gv = man.transport(y, d, v)
        after = man._inner(target, gu.coeff, gv.coeff)
        worst = max(worst, abs(before - after))
    return _check("transport-isometry", worst <= 1e-10, f"max metric distortion = {worst:.2e}")


def _check_gap_theorem(seed) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_margin = math.inf
    for beta in (0.5, 0.9, 0.99):
        radius = gap_radius(beta)
        for _ in range(1000):
            n = int(rng.integers(4, 9))
            c = linalg.random_skew(n, rng)
            c *= rng.uniform(0.0, 1.0) * radius / max(np.linalg.norm(c), 1e-300)
            e_half = linalg.expm_skew(c / 2.0)
            i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
            a = linalg.pair_matrix(i, j, n) / np.sqrt(2.0)
            val = float(np.sum(a * (e_half.T @ a @ e_half)))
            worst_margin = min(worst_margin, val - beta)
    return _check("gap-theorem", worst_margin >= -1e-10, f"min cosine margin over beta grid = {worst_margin:.2e}")


def _check_adversarial(_seed) -> CheckResult:
    from .manifolds import Orthogonal as _O

    details = []
    ok = True
    for n in (4, 6, 10):
        projections, _ = adversarial_projections(n, (0, 1), (2, 3))
        man = _O(n)
        stacked = stacked_projection_matrix(man, np.eye(n), projections)
        sigma_min = float(np.linalg.svd(stacked, compute_uv=False)[-1])
        ratio = norm_equiv_ratio(man, np.eye(n), projections)
        ok = ok and sigma_min < 1e-10 and math.isinf(ratio)
        details.append(f"n={n}: sigma_min={sigma_min:.1e}")
    return _check("adversarial-collapse", ok, "; ".join(details))


def _check_stiefel_rule(seed) -> CheckResult:
    from .manifolds import Stiefel
    from .selection import randomized_stiefel_rule

    n, p, samples = 8, 3, 100_000
    man = Stiefel(n, p)
    rng = np.random.default_rng(seed)
    x = man.random_point(rng)
    rule = randomized_stiefel_rule(man, seed=seed + 1)
    worst_z = 0.0
    for _ in range(20):
        w = man.random_tangent(x, rng)
        w = w.scale(1.0 / man.norm(x, w))
        a = linalg.skew_part(x.T @ w.coeff)
        kernel = w.coeff - x @ (x.T @ w.coeff)
        probs = rule.probabilities
        npairs = len(rule.pairs)
        expected = sum(
            probs[o] * a[i, j] ** 2 for o, (i, j) in enumerate(rule.pairs)
        ) + sum(
            probs[npairs + l] * float(kernel[:, l] @ kernel[:, l]) / (n - p) for l in range(p)
        )
        vals = rule.projection_energy_samples(x, w, samples, rng)
        se = float(vals.std(ddof=1) / np.sqrt(samples))
        worst_z = max(worst_z, abs(float(vals.mean()) - expected) / max(se, 1e-300))
    report = estimate_randomized_constant(rule, x, samples, probes=20, seed=seed + 2)
    c2_ok = report.c_squared_hat >= rule.c_squared - 3.0 * max(report.probe_standard_errors)
    return _check(
        "stiefel-randomized-rule",
        worst_z <= 3.0 and c2_ok,
        f"max |MC - formula| = {worst_z:.2f} SE; C^2_hat = {report.c_squared_hat:.4f} >= {rule.c_squared:.4f} - 3 SE: {c2_ok}",
    )


def _check_line_search(seed) -> CheckResult:
    from .solver import givens_exact_linesearch

    rng = np.random.default_rng(seed)
    etas = np.linspace(0.0, 2.0 * np.pi, 100_000, endpoint=False)
    cos_e, sin_e = np.cos(etas), np.sin(etas)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 11))
        g = rng.standard_normal((n, n)) * rng.uniform(0.5, 3.0)
        i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
        _, val, _ = givens_exact_linesearch(g, i, j)
        # independent brute force: trace of G times the plane rotation at each angle
        rest = float(np.trace(g)) - g[i, i] - g[j, j]
        grid = rest + (g[i, i] * cos_e - g[i, j] * sin_e) + (g[j, i] * sin_e + g[j, j] * cos_e)
        worst = max(worst, abs(val - float(grid.min())))
    return _check("exact-line-search", worst <= 1e-6, f"max |formula - grid min| = {worst:.2e}")


def _check_bcd_recovery(seed) -> CheckResult:
    from .manifolds import Euclidean, Objective, Product
    from .selection import product_rule
    from .solver import FixedInverseL, SolverConfig, tsd_run

    rng = np.random.default_rng(seed)
    n, blocks = 20, 4
    w = rng.standard_normal((n, n))
    q = w.T @ w + n * np.eye(n)
    b = rng.standard_normal(n)
    sizes = [n // blocks] * blocks
    slices = np.split(np.arange(n), blocks)
    l_blocks = [float(np.linalg.eigvalsh(q[np.ix_(s, s)])[-1]) for s in slices]

    man = Product([Euclidean(sz) for sz in sizes])
    obj = Objective(
        eval=lambda x: 0.5 * float(np.concatenate(x) @ q @ np.concatenate(x)) + float(b @ np.concatenate(x)),
        euclidean_gradient=lambda x: tuple(np.split(q @ np.concatenate(x) + b, blocks)),
        block_constants=l_blocks,
    )
    x0_flat = rng.standard_normal(n)
    x0 = tuple(np.split(x0_flat.copy(), blocks))
    cfg = SolverConfig(
        rule=product_rule(man),
        policy=FixedInverseL(),
        max_outer_iterations=100,
        gradient_norm_tolerance=0.0,
    )
    x_tsd, _ = tsd_run(man, obj, x0, cfg)

    # independent textbook cyclic BCD oracle
    x_ref = x0_flat.copy()
    for _ in range(100):
        for k, s in enumerate(slices):
            grad = q @ x_ref + b
            x_ref[s] -= grad[s] / l_blocks[k]
    err = float(np.max(np.abs(np.concatenate(x_tsd) - x_ref)))
    return _check("bcd-recovery", err <= 1e-14, f"max |TSD - BCD oracle| = {err:.2e}")


def _check_decrease_audit(seed) -> CheckResult:
    from . import procrustes
    from .manifolds import Orthogonal as _O
    from .selection import givens_rule, singleton_partition
    from .solver import Backtracking, FixedInverseL, SolverConfig, rgd_run, tsd_run

    n = 20
    inst = procrustes.gen_instance(n, seed)
    obj = procrustes.trace_objective(inst.d)
    man = _O(n)
    cfg = SolverConfig(
        rule=givens_rule(man, singleton_partition(n)),
        policy=FixedInverseL(),
        max_outer_iterations=30,
        gradient_norm_tolerance=1e-12,
        monitor_decrease=True,
    )
    _, trace = tsd_run(man, obj, np.eye(n), cfg)
    audit = decrease_audit(trace, DecreaseConstants(
        block_constants=obj.smoothness_constant,
        smoothness_constant=obj.smoothness_constant,
    ))
    _, gd_trace = rgd_run(man, obj, np.eye(n), SolverConfig(policy=Backtracking(), max_outer_iterations=100))
    strict = all(a > b for a, b in zip(gd_trace.f, gd_trace.f[1:]))
    return _check(
        "decrease-audit",
        audit.passed and strict,
        f"TSD audit violations: {len(audit.violations)}; GD strictly decreasing: {strict}",
    )


def _check_randomized_sum_bound(seed) -> CheckResult:
    from . import procrustes
    from .manifolds import Orthogonal as _O
    from .selection import randomized_orthogonal_rule
    from .solver import FixedInverseL, SolverConfig, tsd_run

    n = 10
    inst = procrustes.gen_instance(n, seed)
    obj = procrustes.trace_objective(inst.d)
    man = _O(n)
    rule = randomized_orthogonal_rule(man, seed=seed + 5)
    cfg = SolverConfig(
        rule=rule,
        policy=FixedInverseL(),
        max_outer_iterations=500,
        gradient_norm_tolerance=1e-12,
        monitor_decrease=True,
    )
    _, trace = tsd_run(man, obj, np.eye(n), cfg)
    c_sq = float(np.min(rule.probabilities))
    eta = c_sq / (2.0 * obj.smoothness_constant)
    total = eta * float(np.sum(np.array(trace.grad_norm[: trace.cycles]) ** 2))
    _, f_star = procrustes.svd_optimum(inst.d)
    bound = trace.f[0] - f_star + 1e-6
    return _check(
        "randomized-sum-bound",
        total <= bound,
        f"sum eta*||grad||^2 = {total:.4f} <= f(x0) - f* + 1e-6 = {bound:.4f}",
    )


def _check_norm_equivalence_bound(seed) -> CheckResult:
    from .manifolds import Orthogonal as _O

    n, beta = 4, 0.95
    man = _O(n)
    rng = np.random.default_rng(seed)
    radius = gap_radius(beta)
    pairs = linalg.strict_upper_pairs(n)
    m = len(pairs)
    gamma = math.sqrt(1.0 - beta**2)
    bound = 1.0 / (1.0 - math.sqrt(m) * gamma)
    worst = 0.0
    y0 = np.eye(n)
    for _ in range(100):
        projections = []
        for i, j in pairs:
            c = linalg.random_skew(n, rng)
            c *= rng.uniform(0.0, 1.0) * radius / max(np.linalg.norm(c), 1e-300)
            e_half = linalg.expm_skew(c / 2.0)
            coeff = e_half.T @ linalg.pair_matrix(i, j, n) @ e_half
            projections.append(rank_one_projection(man, y0, Tangent(y0, coeff)))
        worst = max(worst, norm_equiv_ratio(man, y0, projections))
    return _check(
        "norm-equivalence-bound",
        worst <= bound + 1e-8,
        f"max ratio {worst:.3f} <= 1/(1 - sqrt(m) gamma) = {bound:.3f}",
    )


def _check_projection_norm_bound(seed) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 6))
        amb = int(rng.integers(2 * d, 2 * d + 6))
        beta = float(rng.uniform(0.2, 0.99))
        q = linalg.random_orthogonal(amb, rng)
        u, w = q[:, :d], q[:, d : 2 * d]
        thetas = np.arccos(beta) * rng.uniform(0.0, 1.0, size=d)
        u2 = u * np.cos(thetas) + w * np.sin(thetas)
        p1 = u @ u.T
        p2 = u2 @ u2.T
        dist = float(np.linalg.norm(p1 - p2, ord=2))
        worst = max(worst, dist - d * math.sqrt(1.0 - beta**2))
    return _check("projection-norm-bound", worst <= 1e-10, f"max bound violation = {worst:.2e}")


def run_all(seed: int = 0) -> list:
    """Run the full verification battery; returns a list of CheckResult."""
    checks = [
        _check_counterexamples,
        _check_givens_kernel,
        _check_transport_isometry,
        _check_gap_theorem,
        _check_adversarial,
        _check_stiefel_rule,
        _check_line_search,
        _check_bcd_recovery,
        _check_decrease_audit,
        _check_randomized_sum_bound,
        _check_norm_equivalence_bound,
        _check_projection_norm_bound,
    ]
    return [fn(seed) for fn in checks]
