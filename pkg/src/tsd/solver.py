"""Tangent subspace descent (TSD) and a Riemannian gradient descent baseline.

The TSD outer iteration sweeps the rule's blocks: at inner step k it projects
the Riemannian gradient at the current inner iterate with the rule's k-th
projection and takes an exponential-map step.  Randomized rules use a single
drawn projection per outer iteration.

Three stepsize policies are provided: fixed ``1/L_k`` steps, Armijo
backtracking, and the closed-form exact line search for linear objectives on
the orthogonal group restricted to a Givens plane.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import MonitorError, StepsizeUnderflowError
from .manifolds import Euclidean, Manifold, Objective, Orthogonal, Product, Stiefel, Tangent
from .selection import (
    DeterministicRule,
    GivensRule,
    RandomizedOrthogonalRule,
    RandomizedRule,
    SubspaceProjection,
)

MONITOR_SLACK = 1e-10


# ---------------------------------------------------------------------------
# stepsize policies
# ---------------------------------------------------------------------------


@dataclass
class FixedInverseL:
    """Step ``eta_k = 1/L_k``; constants from here or from the objective."""

    block_constants: object = None  # scalar or per-block sequence

    def constant(self, obj: Objective, k: int) -> float:
        c = self.block_constants
        if c is None:
            c = obj.block_constants if obj.block_constants is not None else obj.smoothness_constant
        if c is None:
            raise ValueError("FixedInverseL requires block or smoothness constants")
        l_k = float(c[k]) if np.ndim(c) == 1 else float(c)
        if l_k <= 0:
            raise ValueError("smoothness constants must be positive")
        return l_k


@dataclass
class Backtracking:
    """Armijo rule: largest ``eta0 * shrink^j`` with sufficient decrease."""

    c: float = 1e-4
    shrink: float = 0.5
    eta0: float = 1.0
    max_halvings: int = 60

    def __post_init__(self):
        if not (0.0 < self.c < 1.0 and 0.0 < self.shrink < 1.0 and self.eta0 > 0.0):
            raise ValueError("need 0 < c < 1, 0 < shrink < 1, eta0 > 0")


@dataclass
class ExactGivens:
    """Closed-form per-plane line search; needs a linear objective on O_n."""


# ---------------------------------------------------------------------------
# configuration and trace
# ---------------------------------------------------------------------------


@dataclass
class SolverConfig:
    rule: object = None
    policy: object = field(default_factory=Backtracking)
    max_outer_iterations: int = 1000
    gradient_norm_tolerance: float = 1e-6
    record_trace: bool = True
    monitor_decrease: bool = False

    def __post_init__(self):
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")
        if self.gradient_norm_tolerance < 0:
            raise ValueError("gradient_norm_tolerance must be nonnegative (0 = run to the cap)")


@dataclass
class IterationTrace:
    """Per-iteration record of a solver run.

    ``f`` and ``grad_norm`` have one entry per recorded point (initial point
    included); the inner lists hold one sub-list per completed outer
    iteration.  ``residuals`` holds the decrease slack
    ``f(y^{k-1}) - f(y^k) - guarantee_k`` and is populated only when the run
    monitors decrease.  ``flops`` is a cumulative estimate: 4n per Givens
    pair update, ``2 n^3`` per dense matrix exponential, block dimension per
    Euclidean block step.
    """

    f: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    block_norms: list = field(default_factory=list)
    stepsizes: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    step_lengths: list = field(default_factory=list)
    flops: list = field(default_factory=list)
    cycles: int = 0

    def record_point(self, f_val: float, grad_norm: float, cum_flops: float) -> None:
        if not np.isfinite(f_val) or not np.isfinite(grad_norm):
            raise ValueError("non-finite objective or gradient encountered")
        self.f.append(float(f_val))
        self.grad_norm.append(float(grad_norm))
        self.flops.append(float(cum_flops))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "f", "grad_norm", "cum_flops", "inner_steps", "sum_step_length", "min_residual"])
            for t, (fv, gn, fl) in enumerate(zip(self.f, self.grad_norm, self.flops)):
                if t == 0:
                    w.writerow([t, repr(fv), repr(gn), repr(fl), 0, "", ""])
                    continue
                k = t - 1
                inner = len(self.block_norms[k]) if k < len(self.block_norms) else 0
                sl = sum(self.step_lengths[k]) if k < len(self.step_lengths) else ""
                mr = min(self.residuals[k]) if k < len(self.residuals) and self.residuals[k] else ""
                w.writerow([t, repr(fv), repr(gn), repr(fl), inner, repr(sl) if sl != "" else "", repr(mr) if mr != "" else ""])


# ---------------------------------------------------------------------------
# steps
# ---------------------------------------------------------------------------


def _dense_step_flops(manifold: Manifold) -> float:
    if isinstance(manifold, (Orthogonal, Stiefel)):
        return 2.0 * manifold.n**3
    if isinstance(manifold, Euclidean):
        return float(manifold.n)
    if isinstance(manifold, Product):
        return sum(_dense_step_flops(f) for f in manifold.factors)
    return float(manifold.dim)


def _apply_step(manifold: Manifold, y, direction: Tangent, eta: float, proj: SubspaceProjection):
    """Move ``exp(y, -eta * direction)``; Givens-sparse fast path on O_n.

    Returns ``(new point, flop estimate)``.  When the projection is a Givens
    block on the orthogonal group the update touches only the paired columns.
    """
    pairs = proj.descriptor.get("pairs") if proj is not None else None
    if pairs is not None and isinstance(manifold, Orthogonal):
        a = direction.coeff
        y_new = y.copy()
        for i, j in pairs:
            linalg.apply_givens_right(y_new, i, j, linalg.givens_rotation_block(-eta * a[i, j]))
        return y_new, 4.0 * manifold.n * len(pairs)
    return manifold.exp(y, direction.scale(-eta)), _dense_step_flops(manifold)


def step_fixed(manifold: Manifold, obj: Objective, y, proj: SubspaceProjection, l_k: float):
    """One fixed-step update ``exp(y, -(1/L_k) P grad f(y))``."""
    if l_k <= 0:
        raise ValueError("L_k must be positive")
    pg = proj.apply(manifold.rgrad(obj, y))
    y_new, _ = _apply_step(manifold, y, pg, 1.0 / l_k, proj)
    return y_new


def _backtrack(manifold, obj, y, direction, dir_norm_sq, f_y, policy: Backtracking, proj):
    eta = policy.eta0
    for _ in range(policy.max_halvings + 1):
        y_new, fl = _apply_step(manifold, y, direction, eta, proj)
        # strict: once the decrease falls below float resolution, keep
        # shrinking until the budget runs out instead of accepting a no-op
        if obj.eval(y_new) < f_y - policy.c * eta * dir_norm_sq:
            return y_new, eta, fl
        eta *= policy.shrink
    raise StepsizeUnderflowError(
        "backtracking underflow: no sufficient decrease after "
        f"{policy.max_halvings} halvings (gradient inconsistency?)"
    )


def step_backtracking(manifold: Manifold, obj: Objective, y, proj: SubspaceProjection, policy: Backtracking):
    """Armijo step along ``-P grad f(y)``; returns ``(next point, stepsize)``."""
    pg = proj.apply(manifold.rgrad(obj, y))
    sq = manifold.metric(y, pg, pg)
    if sq == 0.0:
        return y, 0.0
    y_new, eta, _ = _backtrack(manifold, obj, y, pg, sq, obj.eval(y), policy, proj)
    return y_new, eta


def givens_exact_linesearch(g: np.ndarray, i: int, j: int):
    """Minimize ``trace(G R(eta))`` over rotations in the (i, j) plane.

    ``G = D^T Y`` and ``R(eta) = expm(-eta H_ij)``.  Writing
    ``c = g_ii + g_jj`` and ``s = g_ij - g_ji``, the objective along the
    circle is ``sum_{i' != i,j} g_i'i' + c cos(eta) + s sin(eta)``, so the
    minimum is the off-plane trace minus ``hypot(c, s)``, attained at the
    angle whose cosine and sine are ``-c/r`` and ``-s/r``.

    Returns ``(eta_star, optimal value, 2x2 block of expm(-eta_star H_ij))``.
    In the degenerate case ``(c, s) = (0, 0)`` every angle is optimal and
    ``eta_star = 0`` is returned (identity block), keeping runs deterministic.
    """
    if not 0 <= i < j < g.shape[0]:
        raise ValueError(f"invalid pair ({i}, {j})")
    c = g[i, i] + g[j, j]
    s = g[i, j] - g[j, i]
    r = float(np.hypot(c, s))
    rest = float(np.trace(g)) - c
    if r == 0.0:
        return 0.0, rest, np.eye(2)
    eta = float(np.arctan2(-s, -c)) % (2.0 * np.pi)
    block = np.array([[-c / r, s / r], [-s / r, -c / r]])
    return eta, rest - r, block


# ---------------------------------------------------------------------------
# solver drivers
# ---------------------------------------------------------------------------


def tsd_run(manifold: Manifold, obj: Objective, x0, config: SolverConfig):
    """Run tangent subspace descent; returns ``(final point, trace)``."""
    manifold.check_point(x0)
    rule = config.rule
    if rule is None:
        raise ValueError("config.rule is required for tsd_run")
    if isinstance(rule, RandomizedRule):
        return _run_randomized(manifold, obj, x0, config)
    if not isinstance(rule, DeterministicRule):
        raise ValueError("rule must be a deterministic or randomized selection rule")
    if isinstance(config.policy, ExactGivens):
        _require_givens_linear(manifold, obj, rule)
        return _run_givens_linear(manifold, obj, x0, config)
    return _run_deterministic(manifold, obj, x0, config)


def _rule_block_count(rule, y0) -> int:
    # the parallel-transport rule fixes its decomposition lazily at y0
    if getattr(rule, "block_count", None) is None and hasattr(rule, "_decomposition"):
        rule._decomposition(y0)
    return rule.block_count


def _run_deterministic(manifold, obj, x, config):
    trace = IterationTrace()
    policy = config.policy
    flops = 0.0
    g = manifold.rgrad(obj, x)
    trace.record_point(obj.eval(x), manifold.norm(x, g), flops)
    for _ in range(config.max_outer_iterations):
        if trace.grad_norm[-1] <= config.gradient_norm_tolerance:
            break
        y = x
        m = _rule_block_count(config.rule, y)
        bn, ss, res, sl = [], [], [], []
        f_y = obj.eval(y) if config.monitor_decrease else None
        for k in range(m):
            proj = config.rule.select(x, y, k)
            grad = manifold.rgrad(obj, y)
            pg = proj.apply(grad)
            pg_sq = manifold.metric(y, pg, pg)
            pg_norm = float(np.sqrt(max(pg_sq, 0.0)))
            bn.append(pg_norm)
            if pg_sq == 0.0:
                ss.append(0.0)
                sl.append(0.0)
                if config.monitor_decrease:
                    res.append(0.0)
                continue
            if isinstance(policy, FixedInverseL):
                l_k = policy.constant(obj, k)
                eta = 1.0 / l_k
                y_new, fl = _apply_step(manifold, y, pg, eta, proj)
                guarantee = pg_sq / (2.0 * l_k)
            elif isinstance(policy, Backtracking):
                f_here = f_y if f_y is not None else obj.eval(y)
                y_new, eta, fl = _backtrack(manifold, obj, y, pg, pg_sq, f_here, policy, proj)
                guarantee = policy.c * eta * pg_sq
            else:
                raise ValueError(f"unsupported policy for this run: {policy!r}")
            flops += fl
            ss.append(eta)
            sl.append(eta * pg_norm)
            if config.monitor_decrease:
                f_new = obj.eval(y_new)
                residual = f_y - f_new - guarantee
                if residual < -MONITOR_SLACK:
                    raise MonitorError(
                        f"sufficient decrease violated at inner step {k}: residual {residual:.3e}"
                    )
                res.append(float(residual))
                f_y = f_new
            y = y_new
        x = _maybe_renormalize(manifold, y)
        trace.cycles += 1
        if config.record_trace:
            trace.block_norms.append(bn)
            trace.stepsizes.append(ss)
            trace.residuals.append(res)
            trace.step_lengths.append(sl)
        g = manifold.rgrad(obj, x)
        trace.record_point(obj.eval(x), manifold.norm(x, g), flops)
    return x, trace


def _wrap_angle(eta: float) -> float:
    """Map an angle to its minimal representative in (-pi, pi]."""
    return float((eta + np.pi) % (2.0 * np.pi) - np.pi)


def _run_randomized(manifold, obj, x0, config):
    trace = IterationTrace()
    policy = config.policy
    rule = config.rule
    check_grad = config.gradient_norm_tolerance > 0.0 or config.record_trace
    flops = 0.0
    fast_linear = (
        isinstance(manifold, Orthogonal)
        and obj.linear_matrix is not None
        and isinstance(rule, RandomizedOrthogonalRule)
    )
    x = x0.copy() if isinstance(x0, np.ndarray) else x0
    g_mat = obj.linear_matrix.T @ x if fast_linear else None

    def current_grad_norm():
        if fast_linear:
            return float(np.linalg.norm(linalg.skew_part(g_mat.T)))
        return manifold.norm(x, manifold.rgrad(obj, x))

    if check_grad:
        trace.record_point(obj.eval(x), current_grad_norm(), flops)
    for _ in range(config.max_outer_iterations):
        if check_grad and trace.grad_norm and trace.grad_norm[-1] <= config.gradient_norm_tolerance:
            break
        proj = rule.draw(x)
        pairs = proj.descriptor.get("pairs")
        if fast_linear and isinstance(policy, ExactGivens) and pairs is not None and len(pairs) == 1:
            (i, j) = pairs[0]
            c = g_mat[i, i] + g_mat[j, j]
            s = g_mat[i, j] - g_mat[j, i]
            r = math.hypot(c, s)
            pg_norm = abs(s) / math.sqrt(2.0)
            flops += 4.0 * manifold.n
            if r == 0.0:
                residual, eta_rec, step_len = 0.0, 0.0, 0.0
            else:
                b00, b01 = -c / r, s / r
                xi, xj = x[:, i], x[:, j]
                new_i = b00 * xi - b01 * xj
                new_j = b01 * xi + b00 * xj
                x[:, i] = new_i
                x[:, j] = new_j
                gi, gj = g_mat[:, i], g_mat[:, j]
                new_gi = b00 * gi - b01 * gj
                new_gj = b01 * gi + b00 * gj
                g_mat[:, i] = new_gi
                g_mat[:, j] = new_gj
                residual = c + r
                eta_rec = math.atan2(-s, -c) % (2.0 * math.pi)
                step_len = abs(_wrap_angle(eta_rec)) * math.sqrt(2.0)
            if trace.cycles % 1000 == 999:
                if manifold.orthogonality_residual(x) > manifold.POINT_TOL:
                    x = manifold.project(x)
                g_mat = obj.linear_matrix.T @ x  # re-sync against drift
        else:
            grad = manifold.rgrad(obj, x)
            pg = proj.apply(grad)
            pg_sq = manifold.metric(x, pg, pg)
            pg_norm = float(np.sqrt(max(pg_sq, 0.0)))
            if pg_sq == 0.0:
                eta_rec, residual = 0.0, 0.0
                x_new = x
            elif isinstance(policy, FixedInverseL):
                l_f = policy.constant(obj, 0)
                x_new, fl = _apply_step(manifold, x, pg, 1.0 / l_f, proj)
                flops += fl
                eta_rec = 1.0 / l_f
                residual = None
                if config.monitor_decrease:
                    residual = obj.eval(x) - obj.eval(x_new) - pg_sq / (2.0 * l_f)
            elif isinstance(policy, Backtracking):
                x_new, eta_rec, fl = _backtrack(manifold, obj, x, pg, pg_sq, obj.eval(x), policy, proj)
                flops += fl
                residual = None
                if config.monitor_decrease:
                    residual = obj.eval(x) - obj.eval(x_new) - policy.c * eta_rec * pg_sq
            else:
                raise ValueError(f"unsupported policy for a randomized rule: {policy!r}")
            step_len = abs(eta_rec) * pg_norm
            x = _maybe_renormalize(manifold, x_new)
            if fast_linear:
                g_mat = obj.linear_matrix.T @ x
        if config.monitor_decrease and residual is not None and residual < -MONITOR_SLACK:
            raise MonitorError(f"randomized sufficient decrease violated: residual {residual:.3e}")
        trace.cycles += 1
        if config.record_trace:
            trace.block_norms.append([pg_norm])
            trace.stepsizes.append([eta_rec])
            trace.residuals.append([float(residual)] if (config.monitor_decrease and residual is not None) else [])
            trace.step_lengths.append([step_len])
        if check_grad:
            trace.record_point(obj.eval(x), current_grad_norm(), flops)
    if not check_grad:
        trace.record_point(obj.eval(x), current_grad_norm(), flops)
    return x, trace


def _require_givens_linear(manifold, obj, rule):
    if not isinstance(manifold, Orthogonal):
        raise ValueError("exact Givens line search requires the orthogonal group")
    if obj.linear_matrix is None:
        raise ValueError("exact Givens line search requires a linear objective (set linear_matrix)")
    if not isinstance(rule, GivensRule):
        raise ValueError("exact Givens line search requires a Givens partition rule")


def _run_givens_linear(manifold, obj, x0, config):
    """Cyclic sweeps with per-pair exact line search on f(Y) = trace(D^T Y).

    Maintains ``G = D^T Y`` alongside ``Y``; each pair update rotates two
    columns of both.  The objective is ``trace(G)`` and the gradient
    coefficient is the skew part of ``G^T``, so everything the sweep needs is
    O(1) per pair once G is in hand.  The pair loop is written with scalar
    arithmetic and column views; a sweep costs O(n) per pair.
    """
    d_mat = obj.linear_matrix
    rule: GivensRule = config.rule
    n = manifold.n
    x = x0.copy()
    g_mat = d_mat.T @ x
    trace = IterationTrace()
    flops = 0.0
    sqrt2 = math.sqrt(2.0)
    two_pi = 2.0 * math.pi

    def grad_norm():
        return float(np.linalg.norm(linalg.skew_part(g_mat.T)))

    trace.record_point(float(np.trace(g_mat)), grad_norm(), flops)
    for _ in range(config.max_outer_iterations):
        if trace.grad_norm[-1] <= config.gradient_norm_tolerance:
            break
        bn, ss, res, sl = [], [], [], []
        for block in rule.partition.blocks:
            for i, j in block:
                c = g_mat[i, i] + g_mat[j, j]
                s = g_mat[i, j] - g_mat[j, i]
                r = math.hypot(c, s)
                flops += 4.0 * n
                if r == 0.0:  # objective constant on this plane; stay put
                    if config.record_trace:
                        bn.append(0.0)
                        ss.append(0.0)
                        sl.append(0.0)
                    if config.monitor_decrease:
                        res.append(0.0)
                    continue
                b00 = -c / r  # cos(eta*); the optimal plane contributes -r
                b01 = s / r  # -sin(eta*)
                xi = x[:, i]
                xj = x[:, j]
                new_i = b00 * xi - b01 * xj
                new_j = b01 * xi + b00 * xj
                x[:, i] = new_i
                x[:, j] = new_j
                gi = g_mat[:, i]
                gj = g_mat[:, j]
                new_gi = b00 * gi - b01 * gj
                new_gj = b01 * gi + b00 * gj
                g_mat[:, i] = new_gi
                g_mat[:, j] = new_gj
                if config.record_trace:
                    eta = math.atan2(-s, -c) % two_pi
                    bn.append(abs(s) / sqrt2)  # ||P grad|| = |g_ij - g_ji| / sqrt(2)
                    ss.append(eta)
                    sl.append(abs(_wrap_angle(eta)) * sqrt2)
                if config.monitor_decrease:
                    res.append(c + r)  # decrease c - (-r); hypot keeps it >= 0
        trace.cycles += 1
        if config.record_trace:
            trace.block_norms.append(bn)
            trace.stepsizes.append(ss)
            trace.residuals.append(res)
            trace.step_lengths.append(sl)
        if manifold.orthogonality_residual(x) > manifold.POINT_TOL:
            x = manifold.project(x)
        g_mat = d_mat.T @ x  # re-sync each sweep
        trace.record_point(float(np.trace(g_mat)), grad_norm(), flops)
    return x, trace


def _maybe_renormalize(manifold, x):
    if isinstance(manifold, Orthogonal) and manifold.orthogonality_residual(x) > manifold.POINT_TOL:
        return manifold.project(x)
    if isinstance(manifold, Product):
        return tuple(_maybe_renormalize(f, xi) for f, xi in zip(manifold.factors, x))
    return x


def rgd_run(manifold: Manifold, obj: Objective, x0, config: SolverConfig | None = None):
    """Riemannian gradient descent with backtracking; same trace schema."""
    config = config or SolverConfig()
    manifold.check_point(x0)
    policy = config.policy if isinstance(config.policy, Backtracking) else Backtracking()
    trace = IterationTrace()
    flops = 0.0
    x = x0
    g = manifold.rgrad(obj, x)
    trace.record_point(obj.eval(x), manifold.norm(x, g), flops)
    for _ in range(config.max_outer_iterations):
        if trace.grad_norm[-1] <= config.gradient_norm_tolerance:
            break
        g = manifold.rgrad(obj, x)
        sq = manifold.metric(x, g, g)
        f_x = obj.eval(x)
        x_new, eta, fl = _backtrack(manifold, obj, x, g, sq, f_x, policy, None)
        flops += fl
        trace.cycles += 1
        if config.record_trace:
            gn = float(np.sqrt(sq))
            trace.block_norms.append([gn])
            trace.stepsizes.append([eta])
            trace.step_lengths.append([eta * gn])
            trace.residuals.append([float(f_x - obj.eval(x_new) - policy.c * eta * sq)] if config.monitor_decrease else [])
        x = _maybe_renormalize(manifold, x_new)
        g = manifold.rgrad(obj, x)
        trace.record_point(obj.eval(x), manifold.norm(x, g), flops)
    return x, trace
