"""Dense matrix kernels for the rotation-group geometry code.

Everything here works on plain ``numpy`` arrays.  Skew-symmetric matrices are
stored dense; the Givens-structured representation is a list of
``(i, j, angle)`` triples with 0-based indices ``i < j``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import CutLocusError

# Input validation tolerance for "is orthogonal / is skew" checks; kernels
# themselves target 1e-12 residuals (an order below accumulated roundoff at
# the dimensions this package is used at, n <= 200).
INPUT_TOL = 1e-8


def skew_part(m: np.ndarray) -> np.ndarray:
    """Skew-symmetric part ``(m - m^T)/2``; exactly skew in floating point."""
    return (m - m.T) / 2.0


def require_skew(c: np.ndarray, tol: float = INPUT_TOL) -> np.ndarray:
    """Validate that ``c`` is a square skew-symmetric matrix."""
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {c.shape}")
    if np.linalg.norm(c + c.T) > tol * max(1.0, np.linalg.norm(c)):
        raise ValueError("matrix is not skew-symmetric")
    return c


def require_orthonormal_columns(u: np.ndarray, tol: float = INPUT_TOL) -> np.ndarray:
    """Validate that ``u`` has orthonormal columns."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {u.shape}")
    p = u.shape[1]
    if np.linalg.norm(u.T @ u - np.eye(p)) > tol:
        raise ValueError("columns are not orthonormal")
    return u


def expm_skew(c: np.ndarray) -> np.ndarray:
    """Matrix exponential of a skew-symmetric matrix.

    The result is orthogonal with determinant +1.  Uses scaling-and-squaring
    with a Pade approximant, which is validated against a truncated
    Taylor-series oracle in the test suite.
    """
    c = require_skew(c)
    return scipy.linalg.expm(c)


def validate_givens_pairs(pairs: Sequence[tuple[int, int, float]], n: int) -> None:
    """Check index bounds, ``i < j`` ordering, and pairwise-distinct indices.

    Distinctness across *all* pairs is what makes the planar rotations
    commute and the exponential decouple into independent 2x2 blocks.
    """
    seen: set[int] = set()
    for i, j, _ in pairs:
        if not (0 <= i < j < n):
            raise ValueError(f"invalid pair ({i}, {j}) for dimension {n}")
        if i in seen or j in seen:
            raise ValueError(f"overlapping index in pair ({i}, {j}); all indices must be distinct")
        seen.add(i)
        seen.add(j)


def expm_givens(pairs: Sequence[tuple[int, int, float]], n: int) -> np.ndarray:
    """Exponential of ``sum_k a_k * H_{i_k j_k}`` for disjoint index pairs.

    ``H_{ij} = e_i e_j^T - e_j e_i^T``.  The result is the identity except for
    each (i, j) submatrix, which is the planar rotation
    ``[[cos a, sin a], [-sin a, cos a]]``.  Cost is proportional to the number
    of pairs (plus the identity allocation).
    """
    validate_givens_pairs(pairs, n)
    q = np.eye(n)
    for i, j, a in pairs:
        ca, sa = np.cos(a), np.sin(a)
        q[i, i] = ca
        q[i, j] = sa
        q[j, i] = -sa
        q[j, j] = ca
    return q


def apply_givens_right(y: np.ndarray, i: int, j: int, block: np.ndarray) -> None:
    """In-place ``y <- y @ R`` where R is identity except the (i, j) 2x2 block.

    Touches only columns ``i`` and ``j`` of ``y``.
    """
    ci = y[:, i].copy()
    cj = y[:, j].copy()
    y[:, i] = ci * block[0, 0] + cj * block[1, 0]
    y[:, j] = ci * block[0, 1] + cj * block[1, 1]


def givens_rotation_block(angle: float) -> np.ndarray:
    """The 2x2 rotation ``[[cos a, sin a], [-sin a, cos a]]``."""
    ca, sa = np.cos(angle), np.sin(angle)
    return np.array([[ca, sa], [-sa, ca]])


def logm_orthogonal(q: np.ndarray, branch_tol: float = 1e-7) -> np.ndarray:
    """Principal skew-symmetric logarithm of an orthogonal matrix.

    Returns the skew matrix ``C`` with ``expm_skew(C) = q`` whose planar
    rotation angles all lie in ``(-pi, pi)``.  Computed from the real Schur
    form, reading each standardized 2x2 block as a rotation and extracting
    its angle with ``atan2``, which keeps the branch choice explicit.

    Raises:
        CutLocusError: if any eigenvalue of ``q`` is within ``branch_tol``
            of -1 (rotation by pi, or a reflection), where the principal
            branch is undefined.
    """
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    if q.ndim != 2 or q.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {q.shape}")
    if np.linalg.norm(q.T @ q - np.eye(n)) > INPUT_TOL:
        raise ValueError("matrix is not orthogonal")

    t, z = scipy.linalg.schur(q, output="real")
    c = np.zeros((n, n))
    k = 0
    while k < n:
        if k + 1 < n and abs(t[k + 1, k]) > 1e-12:
            a = 0.5 * (t[k, k] + t[k + 1, k + 1])
            b = 0.5 * (t[k, k + 1] - t[k + 1, k])
            theta = np.arctan2(b, a)
            if abs(theta) >= np.pi - branch_tol:
                raise CutLocusError("eigenvalue within tolerance of -1; principal log undefined")
            c[k, k + 1] = theta
            c[k + 1, k] = -theta
            k += 2
        else:
            if t[k, k] < 0.0:
                raise CutLocusError("eigenvalue -1; principal log undefined")
            k += 1
    out = z @ c @ z.T
    return skew_part(out)


def random_orthogonal(n: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Haar-distributed orthogonal matrix, deterministic given the seed.

    Orthonormalizes a Gaussian matrix by QR and fixes the signs so that the
    triangular factor has a nonnegative diagonal, which makes the QR output
    Haar-distributed rather than biased by LAPACK's sign convention.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def random_skew(n: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian skew-symmetric matrix (test and probe helper)."""
    return skew_part(rng.standard_normal((n, n)))


def orth_complement_basis(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``col(u)``.

    For ``u`` with orthonormal columns, returns ``u_perp`` of shape
    ``(n, n-p)`` with ``u_perp^T u_perp = I`` and ``u^T u_perp = 0``.
    """
    u = require_orthonormal_columns(u)
    n, p = u.shape
    if p >= n:
        raise ValueError(f"complement is empty for p={p} >= n={n}")
    q, _ = scipy.linalg.qr(u)  # full n x n factor
    return q[:, p:]


def strict_upper_pairs(n: int) -> list[tuple[int, int]]:
    """All index pairs ``(i, j)`` with ``0 <= i < j < n``, lexicographic."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def pair_matrix(i: int, j: int, n: int) -> np.ndarray:
    """The skew basis matrix ``H_{ij} = e_i e_j^T - e_j e_i^T``."""
    h = np.zeros((n, n))
    h[i, j] = 1.0
    h[j, i] = -1.0
    return h
