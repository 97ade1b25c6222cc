"""Manifold geometry: metric, exponential map, transport, gradients.

Four geometries are provided:

* ``Euclidean(n)`` -- points are vectors, all maps are affine.
* ``Orthogonal(n)`` -- the group of n x n orthogonal matrices.  A tangent
  vector at ``Y`` is ``Y @ A`` with ``A`` skew-symmetric; we store the skew
  coefficient ``A``.  Metric: ``<YA, YB> = trace(A^T B)``.
* ``Stiefel(n, p)`` -- orthonormal n x p frames with the canonical metric
  ``<V, W>_U = trace(V^T (I - U U^T / 2) W)``; tangent vectors are stored as
  ambient n x p matrices.
* ``Product(factors)`` -- tuples of points; every map acts slot-wise.

Points are plain arrays (tuples of arrays for products).  Tangent vectors
carry their base point in a small immutable wrapper so anchoring mistakes
fail loudly instead of silently mixing tangent spaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .errors import UnsupportedGeometryError

ANCHOR_ATOL = 1e-9


def points_equal(x, y, atol: float = ANCHOR_ATOL) -> bool:
    if isinstance(x, tuple) or isinstance(y, tuple):
        return (
            isinstance(x, tuple)
            and isinstance(y, tuple)
            and len(x) == len(y)
            and all(points_equal(a, b, atol) for a, b in zip(x, y))
        )
    return x.shape == y.shape and bool(np.allclose(x, y, rtol=0.0, atol=atol))


def scale_coeff(coeff, s: float):
    if isinstance(coeff, tuple):
        return tuple(scale_coeff(c, s) for c in coeff)
    return s * coeff


def add_coeff(a, b):
    if isinstance(a, tuple):
        return tuple(add_coeff(x, y) for x, y in zip(a, b))
    return a + b


@dataclass(frozen=True)
class Tangent:
    """A tangent vector: a coefficient anchored at a base point.

    The coefficient convention is geometry-specific (see the module
    docstring); for products it is a tuple of slot coefficients.
    """

    base: object
    coeff: object

    def scale(self, s: float) -> "Tangent":
        return Tangent(self.base, scale_coeff(self.coeff, s))

    def __add__(self, other: "Tangent") -> "Tangent":
        if not points_equal(self.base, other.base):
            raise ValueError("cannot add tangent vectors anchored at different points")
        return Tangent(self.base, add_coeff(self.coeff, other.coeff))


@dataclass(frozen=True)
class Isometry:
    """An invertible metric-preserving linear map between two tangent spaces.

    ``forward`` and ``inverse`` act on coefficient representations; the base
    points delimit where each side lives.
    """

    source: object
    target: object
    forward: Callable
    inverse: Callable


@dataclass
class Objective:
    """A smooth objective: value, Euclidean gradient, optional constants.

    ``eval`` maps a point to a scalar; ``euclidean_gradient`` maps a point to
    an ambient gradient (tuple of ambient gradients for product points).
    ``smoothness_constant`` and ``block_constants`` feed fixed-step policies
    and the descent monitors; they are upper estimates, never fitted.
    ``linear_matrix`` is set when the objective is ``Y -> trace(D^T Y)`` on
    the orthogonal group, which unlocks the closed-form Givens line search.
    """

    eval: Callable
    euclidean_gradient: Callable
    smoothness_constant: float | None = None
    block_constants: Sequence[float] | None = None
    linear_matrix: np.ndarray | None = None


class Manifold:
    """Base interface; see concrete subclasses for the formulas."""

    dim: int  # tangent-space dimension

    # -- anchoring ---------------------------------------------------------
    def _check_anchor(self, x, v: Tangent) -> None:
        if v.base is not x and not points_equal(x, v.base):
            raise ValueError("tangent vector is anchored at a different base point")

    # -- interface ---------------------------------------------------------
    def check_point(self, x) -> None:
        raise NotImplementedError

    def metric(self, x, u: Tangent, v: Tangent) -> float:
        self._check_anchor(x, u)
        self._check_anchor(x, v)
        return self._inner(x, u.coeff, v.coeff)

    def norm(self, x, v: Tangent) -> float:
        return float(np.sqrt(max(self.metric(x, v, v), 0.0)))

    def exp(self, x, v: Tangent):
        self._check_anchor(x, v)
        return self._exp(x, v.coeff)

    def inv_exp(self, x, y) -> Tangent:
        """Minimal-norm tangent vector carrying ``x`` to ``y``."""
        return Tangent(x, self._log(x, y))

    def transport(self, x, direction: Tangent, w: Tangent) -> Tangent:
        """Parallel transport of ``w`` along ``t -> exp(x, t*direction)`` to t=1."""
        self._check_anchor(x, direction)
        self._check_anchor(x, w)
        y, coeff = self._transport(x, direction.coeff, w.coeff)
        return Tangent(y, coeff)

    def transport_isometry(self, x, direction: Tangent) -> Isometry:
        """Parallel transport along ``t -> exp(x, t*direction)`` as an isometry.

        The inverse transports back along the reversed geodesic, which undoes
        parallel transport exactly.
        """
        self._check_anchor(x, direction)
        d = direction.coeff
        y, d_at_y = self._transport(x, d, d)
        back = scale_coeff(d_at_y, -1.0)
        return Isometry(
            source=x,
            target=y,
            forward=lambda c: self._transport(x, d, c)[1],
            inverse=lambda c: self._transport(y, back, c)[1],
        )

    def distance(self, x, y) -> float:
        return self.norm(x, self.inv_exp(x, y))

    def rgrad(self, obj: Objective, x) -> Tangent:
        """Riemannian gradient: the metric dual of the differential at ``x``."""
        return Tangent(x, self._egrad_to_coeff(x, obj.euclidean_gradient(x)))

    def zero_tangent(self, x) -> Tangent:
        return Tangent(x, self._zero_coeff(x))

    def random_point(self, rng: np.random.Generator):
        raise NotImplementedError

    def random_tangent(self, x, rng: np.random.Generator) -> Tangent:
        raise NotImplementedError

    # -- orthonormal frame -------------------------------------------------
    # Isometric coordinates on T_x M: frame_coords is a linear bijection to
    # R^dim carrying the Riemannian inner product to the dot product.
    def frame_coords(self, x, v: Tangent) -> np.ndarray:
        self._check_anchor(x, v)
        return self._coords(x, v.coeff)

    def frame_tangent(self, x, coords: np.ndarray) -> Tangent:
        return Tangent(x, self._from_coords(x, np.asarray(coords, dtype=float)))

    # -- geometry-specific hooks --------------------------------------------
    def _inner(self, x, a, b) -> float:
        raise NotImplementedError

    def _exp(self, x, a):
        raise NotImplementedError

    def _log(self, x, y):
        raise UnsupportedGeometryError(f"{type(self).__name__} has no inverse exponential")

    def _transport(self, x, direction, w):
        raise UnsupportedGeometryError(f"{type(self).__name__} has no closed-form transport")

    def _egrad_to_coeff(self, x, g):
        raise NotImplementedError

    def _zero_coeff(self, x):
        raise NotImplementedError

    def _coords(self, x, a) -> np.ndarray:
        raise NotImplementedError

    def _from_coords(self, x, c):
        raise NotImplementedError


class Euclidean(Manifold):
    """Flat ``R^n``: the metric is the dot product and exp is addition."""

    def __init__(self, n: int):
        self.n = n
        self.dim = n

    def check_point(self, x) -> None:
        if np.shape(x) != (self.n,):
            raise ValueError(f"expected shape ({self.n},), got {np.shape(x)}")

    def _inner(self, x, a, b) -> float:
        return float(np.dot(a, b))

    def _exp(self, x, a):
        return x + a

    def _log(self, x, y):
        return y - x

    def _transport(self, x, direction, w):
        return x + direction, w.copy()

    def _egrad_to_coeff(self, x, g):
        g = np.asarray(g, dtype=float)
        if g.shape != (self.n,):
            raise ValueError(f"gradient shape {g.shape} does not match point shape ({self.n},)")
        return g

    def _zero_coeff(self, x):
        return np.zeros(self.n)

    def random_point(self, rng):
        return rng.standard_normal(self.n)

    def random_tangent(self, x, rng):
        return Tangent(x, rng.standard_normal(self.n))

    def _coords(self, x, a):
        return np.asarray(a, dtype=float).copy()

    def _from_coords(self, x, c):
        return c.copy()


class Orthogonal(Manifold):
    """The orthogonal group ``O_n`` with metric ``<YA, YB> = trace(A^T B)``.

    Geodesics from ``Y`` with initial coefficient ``C`` are
    ``t -> Y @ expm(t C)``.  Parallel transport of ``Y A`` along that
    geodesic conjugates the coefficient by ``expm(t C / 2)``.
    """

    POINT_TOL = 1e-8

    def __init__(self, n: int):
        self.n = n
        self.dim = n * (n - 1) // 2
        self._triu = np.triu_indices(n, k=1)

    def check_point(self, x) -> None:
        if np.shape(x) != (self.n, self.n):
            raise ValueError(f"expected shape ({self.n}, {self.n}), got {np.shape(x)}")
        if self.orthogonality_residual(x) > self.POINT_TOL:
            raise ValueError("point is not orthogonal within tolerance")

    @staticmethod
    def orthogonality_residual(x) -> float:
        n = x.shape[0]
        return float(np.linalg.norm(x.T @ x - np.eye(n)))

    def project(self, x) -> np.ndarray:
        """Nearest orthogonal matrix (polar factor); drift correction."""
        u, _, vt = np.linalg.svd(x)
        return u @ vt

    def _inner(self, x, a, b) -> float:
        return float(np.sum(a * b))

    def _exp(self, x, a):
        return x @ linalg.expm_skew(a)

    def _log(self, x, y):
        return linalg.logm_orthogonal(x.T @ y)

    def _transport(self, x, direction, w):
        e_half = linalg.expm_skew(direction / 2.0)
        y = x @ (e_half @ e_half)
        return y, e_half.T @ w @ e_half

    def transport_isometry(self, x, direction: Tangent) -> Isometry:
        self._check_anchor(x, direction)
        e_half = linalg.expm_skew(direction.coeff / 2.0)
        y = x @ (e_half @ e_half)
        return Isometry(
            source=x,
            target=y,
            forward=lambda c: e_half.T @ c @ e_half,
            inverse=lambda c: e_half @ c @ e_half.T,
        )

    def _egrad_to_coeff(self, x, g):
        g = np.asarray(g, dtype=float)
        if g.shape != (self.n, self.n):
            raise ValueError(f"gradient shape {g.shape} does not match point shape")
        return linalg.skew_part(x.T @ g)

    def _zero_coeff(self, x):
        return np.zeros((self.n, self.n))

    def random_point(self, rng):
        return linalg.random_orthogonal(self.n, rng)

    def random_tangent(self, x, rng):
        return Tangent(x, linalg.random_skew(self.n, rng))

    def _coords(self, x, a):
        return np.sqrt(2.0) * a[self._triu]

    def _from_coords(self, x, c):
        a = np.zeros((self.n, self.n))
        a[self._triu] = c / np.sqrt(2.0)
        return a - a.T


class Stiefel(Manifold):
    """Orthonormal frames ``St(p, n)`` with the canonical metric.

    Tangent vectors at ``U`` are ambient matrices ``V = U A + U_perp B`` with
    ``A = U^T V`` skew.  The exponential map embeds ``(A, B)`` in an n x n
    skew matrix and exponentiates; inverse exp and parallel transport have no
    closed form here and raise ``UnsupportedGeometryError``.
    """

    POINT_TOL = 1e-8
    TANGENT_TOL = 1e-10

    def __init__(self, n: int, p: int):
        if p >= n:
            raise ValueError("Stiefel(n, p) requires p < n; use Orthogonal(n) for p = n")
        self.n = n
        self.p = p
        self.dim = p * (p - 1) // 2 + (n - p) * p
        self._triu = np.triu_indices(p, k=1)

    def check_point(self, x) -> None:
        if np.shape(x) != (self.n, self.p):
            raise ValueError(f"expected shape ({self.n}, {self.p}), got {np.shape(x)}")
        if np.linalg.norm(x.T @ x - np.eye(self.p)) > self.POINT_TOL:
            raise ValueError("frame columns are not orthonormal within tolerance")

    def check_tangent(self, x, v: Tangent) -> None:
        self._check_anchor(x, v)
        a = x.T @ v.coeff
        if np.linalg.norm(a + a.T) > self.TANGENT_TOL * max(1.0, np.linalg.norm(v.coeff)):
            raise ValueError("coefficient is not in the tangent space (U^T V not skew)")

    def _inner(self, x, a, b) -> float:
        xa = x.T @ a
        xb = x.T @ b
        return float(np.sum(a * b) - 0.5 * np.sum(xa * xb))

    def _exp(self, x, v):
        u_perp = linalg.orth_complement_basis(x)
        a = linalg.skew_part(x.T @ v)
        b = u_perp.T @ v
        m = np.zeros((self.n, self.n))
        m[: self.p, : self.p] = a
        m[: self.p, self.p :] = -b.T
        m[self.p :, : self.p] = b
        return (np.hstack([x, u_perp]) @ linalg.expm_skew(m))[:, : self.p]

    def _egrad_to_coeff(self, x, g):
        g = np.asarray(g, dtype=float)
        if g.shape != (self.n, self.p):
            raise ValueError(f"gradient shape {g.shape} does not match point shape")
        return g - x @ g.T @ x

    def _zero_coeff(self, x):
        return np.zeros((self.n, self.p))

    def random_point(self, rng):
        z = rng.standard_normal((self.n, self.p))
        q, r = np.linalg.qr(z)
        d = np.sign(np.diag(r))
        d[d == 0] = 1.0
        return q * d

    def random_tangent(self, x, rng):
        z = rng.standard_normal((self.n, self.p))
        # project: V = z - U sym(U^T z); then U^T V is skew
        xz = x.T @ z
        return Tangent(x, z - x @ ((xz + xz.T) / 2.0))

    def _coords(self, x, v):
        a = linalg.skew_part(x.T @ v)
        b = linalg.orth_complement_basis(x).T @ v
        return np.concatenate([a[self._triu], b.ravel()])

    def _from_coords(self, x, c):
        k = self.p * (self.p - 1) // 2
        a = np.zeros((self.p, self.p))
        a[self._triu] = c[:k]
        a = a - a.T
        b = c[k:].reshape(self.n - self.p, self.p)
        return x @ a + linalg.orth_complement_basis(x) @ b


class Product(Manifold):
    """Cartesian product; points and coefficients are tuples, maps act slot-wise."""

    def __init__(self, factors: Sequence[Manifold]):
        self.factors = tuple(factors)
        self.dim = sum(f.dim for f in self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def check_point(self, x) -> None:
        if not isinstance(x, tuple) or len(x) != len(self.factors):
            raise ValueError(f"expected a tuple of {len(self.factors)} slot points")
        for f, xi in zip(self.factors, x):
            f.check_point(xi)

    def _inner(self, x, a, b) -> float:
        return sum(f._inner(xi, ai, bi) for f, xi, ai, bi in zip(self.factors, x, a, b))

    def _exp(self, x, a):
        return tuple(f._exp(xi, ai) for f, xi, ai in zip(self.factors, x, a))

    def _log(self, x, y):
        return tuple(f._log(xi, yi) for f, xi, yi in zip(self.factors, x, y))

    def _transport(self, x, direction, w):
        out = [f._transport(xi, di, wi) for f, xi, di, wi in zip(self.factors, x, direction, w)]
        return tuple(y for y, _ in out), tuple(c for _, c in out)

    def _egrad_to_coeff(self, x, g):
        if not isinstance(g, tuple) or len(g) != len(self.factors):
            raise ValueError("product gradient must be a tuple matching the slots")
        return tuple(f._egrad_to_coeff(xi, gi) for f, xi, gi in zip(self.factors, x, g))

    def _zero_coeff(self, x):
        return tuple(f._zero_coeff(xi) for f, xi in zip(self.factors, x))

    def random_point(self, rng):
        return tuple(f.random_point(rng) for f in self.factors)

    def random_tangent(self, x, rng):
        return Tangent(x, tuple(f.random_tangent(xi, rng).coeff for f, xi in zip(self.factors, x)))

    def _coords(self, x, a):
        return np.concatenate(
            [f._coords(xi, ai) for f, xi, ai in zip(self.factors, x, a)]
        )

    def _from_coords(self, x, c):
        out = []
        at = 0
        for f, xi in zip(self.factors, x):
            out.append(f._from_coords(xi, c[at : at + f.dim]))
            at += f.dim
        return tuple(out)
