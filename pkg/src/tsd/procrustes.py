"""Orthogonal Procrustes test instances and their closed-form optima.

An instance is ``min_Y ||A Y - B||_F^2`` over orthogonal ``Y``, generated as
``B = A X_true + noise``.  Expanding the square, this is equivalent to
minimizing the linear objective ``trace(D^T Y)`` with ``D = -A^T B``, which
is what the solvers see.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .manifolds import Objective


@dataclass(frozen=True)
class ProcrustesInstance:
    n: int
    seed: int
    noise_scale: float
    a: np.ndarray
    x_true: np.ndarray
    b: np.ndarray
    d: np.ndarray


def gen_instance(n: int, seed: int, noise_scale: float = 1.0) -> ProcrustesInstance:
    """Seeded instance: A has N(0, 4) entries, X_true is Haar, noise N(0, 1).

    ``noise_scale`` scales the noise standard deviation; 0 makes ``X_true``
    the exact minimizer of ``||A Y - B||_F``.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    a = 2.0 * rng.standard_normal((n, n))
    x_true = linalg.random_orthogonal(n, rng)
    b = a @ x_true + noise_scale * rng.standard_normal((n, n))
    d = -(a.T @ b)
    return ProcrustesInstance(n=n, seed=seed, noise_scale=noise_scale, a=a, x_true=x_true, b=b, d=d)


def trace_objective(d: np.ndarray) -> Objective:
    """The objective ``Y -> trace(D^T Y)`` on the orthogonal group.

    The smoothness constant is the conservative upper estimate ``||D||_F``
    (the second derivative along any unit-speed geodesic is bounded by it);
    it feeds fixed-step policies and decrease monitors only.
    """
    d = np.asarray(d, dtype=float)
    return Objective(
        eval=lambda y: float(np.sum(d * y)),
        euclidean_gradient=lambda y: d,
        smoothness_constant=float(np.linalg.norm(d)),
        linear_matrix=d,
    )


def svd_optimum(d: np.ndarray):
    """Global minimizer of ``trace(D^T Y)`` over O_n, via SVD.

    Writing ``-D = U S V^T``, the maximizer of ``trace((-D)^T Y)`` is
    ``U V^T`` and the minimum of the original objective is the negated
    nuclear norm of ``D``.  Returns ``(Y_star, f_star)``.
    """
    u, s, vt = np.linalg.svd(-np.asarray(d, dtype=float))
    y = u @ vt
    return y, -float(np.sum(s))


def component_optimum(d: np.ndarray, det_sign: float):
    """Minimizer of ``trace(D^T Y)`` over the component ``det Y = det_sign``.

    Geodesic methods cannot leave the determinant component of their start
    point, so this is the value they can actually attain.  Standard
    sign-constrained Procrustes solution: flip the smallest singular
    direction when the unconstrained optimizer lands in the other component.
    """
    if det_sign not in (-1.0, 1.0, -1, 1):
        raise ValueError("det_sign must be +1 or -1")
    u, s, vt = np.linalg.svd(-np.asarray(d, dtype=float))
    flip = float(det_sign) * np.sign(np.linalg.det(u @ vt))
    scale = np.ones(len(s))
    scale[-1] = flip
    y = (u * scale) @ vt
    value = -(float(np.sum(s[:-1])) + flip * float(s[-1]))
    return y, value
