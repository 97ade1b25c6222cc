"""Tangent subspace selection rules and projection machinery.

A rule maps the inner-iteration state ``(y0, y_prev, k)`` (deterministic) or
the current iterate (randomized, one block per outer iteration) to an
orthogonal projection on the tangent space at the iterate.  All projections
returned here are idempotent, self-adjoint for the Riemannian metric, and
contractive; the test suite property-checks this per rule and geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .manifolds import (
    Isometry,
    Manifold,
    Orthogonal,
    Product,
    Stiefel,
    Tangent,
    points_equal,
    scale_coeff,
)

PROJECTION_TOL = 1e-12


@dataclass
class SubspaceProjection:
    """An orthogonal projection on a tangent space.

    ``apply_coeff`` acts on coefficient representations; ``apply`` wraps it
    with base-point anchoring checks.  ``descriptor`` carries rule-specific
    metadata (block index, Givens pairs, sampled direction) that solvers may
    use for structured updates.
    """

    manifold: Manifold
    base: object
    apply_coeff: Callable
    rank: int
    descriptor: dict = field(default_factory=dict)

    def apply(self, v: Tangent) -> Tangent:
        if v.base is not self.base and not points_equal(v.base, self.base):
            raise ValueError("tangent vector base does not match projection base")
        return Tangent(v.base, self.apply_coeff(v.coeff))


def identity_projection(manifold: Manifold, x) -> SubspaceProjection:
    return SubspaceProjection(manifold, x, lambda c: c, manifold.dim, {"kind": "identity"})


def rank_one_projection(manifold: Manifold, x, direction: Tangent, descriptor=None) -> SubspaceProjection:
    """Projection onto the span of a single tangent vector."""
    sq = manifold.metric(x, direction, direction)
    if sq <= 0.0:
        raise ValueError("cannot project onto a zero direction")
    d = direction.coeff

    def apply_coeff(c):
        return scale_coeff(d, manifold._inner(x, d, c) / sq)

    desc = dict(descriptor or {})
    desc.setdefault("kind", "rank-one")
    return SubspaceProjection(manifold, x, apply_coeff, 1, desc)


def coordinate_block_projection(manifold: Manifold, x, indices: Sequence[int], descriptor=None) -> SubspaceProjection:
    """Projection onto the span of selected orthonormal-frame directions."""
    mask = np.zeros(manifold.dim)
    mask[list(indices)] = 1.0

    def apply_coeff(c):
        coords = manifold._coords(x, c)
        return manifold._from_coords(x, coords * mask)

    desc = dict(descriptor or {})
    desc.setdefault("kind", "frame-block")
    return SubspaceProjection(manifold, x, apply_coeff, len(indices), desc)


def onb_block_decomposition(manifold: Manifold, x, blocks: Sequence[Sequence[int]]) -> list[SubspaceProjection]:
    """Orthogonal decomposition of T_x M from a partition of frame indices."""
    flat = sorted(i for b in blocks for i in b)
    if flat != list(range(manifold.dim)):
        raise ValueError("blocks must partition the frame indices 0..dim-1")
    return [
        coordinate_block_projection(manifold, x, b, {"kind": "frame-block", "block": k})
        for k, b in enumerate(blocks)
    ]


def conjugated_projection(iso: Isometry, proj: SubspaceProjection, probe_count: int = 4) -> SubspaceProjection:
    """Push a projection through a metric-preserving invertible map.

    Returns the projection ``U P U^{-1}`` onto the image of the original
    subspace; the rank is unchanged.  The map is spot-checked for metric
    preservation on a few frame directions and rejected if it distorts the
    metric beyond tolerance.
    """
    m = proj.manifold
    if not points_equal(proj.base, iso.source):
        raise ValueError("projection base does not match the isometry source")
    _check_isometry(m, iso, probe_count)

    def apply_coeff(c):
        return iso.forward(proj.apply_coeff(iso.inverse(c)))

    desc = dict(proj.descriptor)
    desc["conjugated"] = True
    return SubspaceProjection(m, iso.target, apply_coeff, proj.rank, desc)


def _check_isometry(manifold: Manifold, iso: Isometry, probe_count: int, tol: float = 1e-8) -> None:
    d = manifold.dim
    idx = np.linspace(0, d - 1, num=min(probe_count, d), dtype=int)
    probes = []
    for a in idx:
        e = np.zeros(d)
        e[a] = 1.0
        probes.append(manifold.frame_tangent(iso.source, e).coeff)
    for a, ca in enumerate(probes):
        fa = iso.forward(ca)
        for cb in probes[a:]:
            before = manifold._inner(iso.source, ca, cb)
            after = manifold._inner(iso.target, fa, iso.forward(cb))
            if abs(before - after) > tol:
                raise ValueError("map distorts the metric; not an isometry")


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------


class SelectionRule:
    kind: str
    block_count: int


class DeterministicRule(SelectionRule):
    kind = "deterministic"

    def select(self, y0, y_prev, k: int) -> SubspaceProjection:
        raise NotImplementedError


class RandomizedRule(SelectionRule):
    """Randomized rules draw one projection per outer iteration.

    A rule instance owns a seeded generator and is confined to one solver
    run; distinct instances with distinct seeds may run concurrently.
    """

    kind = "randomized"
    block_count = 1

    def __init__(self, probabilities: np.ndarray, seed):
        p = np.asarray(probabilities, dtype=float)
        if p.ndim != 1 or np.any(p <= 0.0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be strictly positive and sum to 1")
        self.probabilities = p
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def draw(self, x) -> SubspaceProjection:
        raise NotImplementedError


class ParallelTransportRule(DeterministicRule):
    """Transport a fixed orthogonal decomposition along the inner iterates.

    At the start of each outer iteration the factory is called once at
    ``y0``; block ``k`` at ``y_prev`` is the conjugation of the k-th
    reference projection by parallel transport from ``y0``.  The pulled-back
    projections therefore equal the reference ones exactly, so norm
    equivalence holds at every iteration with no distance restriction.
    """

    def __init__(self, manifold: Manifold, decomp_factory: Callable):
        self.manifold = manifold
        self.decomp_factory = decomp_factory
        self._cached_y0 = None
        self._cached_decomp = None
        self.block_count = None  # set on first select

    def _decomposition(self, y0) -> list[SubspaceProjection]:
        if self._cached_y0 is None or not points_equal(y0, self._cached_y0):
            self._cached_y0 = y0
            self._cached_decomp = list(self.decomp_factory(y0))
            self.block_count = len(self._cached_decomp)
        return self._cached_decomp

    def select(self, y0, y_prev, k: int) -> SubspaceProjection:
        decomp = self._decomposition(y0)
        if not 0 <= k < len(decomp):
            raise ValueError(f"block index {k} out of range for {len(decomp)} blocks")
        proj = decomp[k]
        if y_prev is y0 or points_equal(y_prev, y0):
            return proj
        direction = self.manifold.inv_exp(y0, y_prev)
        iso = self.manifold.transport_isometry(y0, direction)
        return conjugated_projection(iso, proj)


class ProductRule(DeterministicRule):
    """Slot selector on a product manifold: zero every slot except ``k``.

    With Euclidean factors over coordinate blocks this is exactly cyclic
    block coordinate descent.
    """

    def __init__(self, manifold: Product):
        if not isinstance(manifold, Product):
            raise ValueError("product rule requires a Product manifold")
        self.manifold = manifold
        self.block_count = len(manifold)

    def projection(self, x, k: int) -> SubspaceProjection:
        m = self.manifold
        if not 0 <= k < len(m):
            raise ValueError(f"slot index {k} out of range for {len(m)} slots")

        def apply_coeff(c):
            return tuple(
                ci if i == k else f._zero_coeff(xi)
                for i, (f, xi, ci) in enumerate(zip(m.factors, x, c))
            )

        return SubspaceProjection(m, x, apply_coeff, m.factors[k].dim, {"kind": "slot", "slot": k})

    def select(self, y0, y_prev, k: int) -> SubspaceProjection:
        return self.projection(y_prev, k)


@dataclass(frozen=True)
class GivensPartition:
    """A partition of the index pairs ``{(i, j): 0 <= i < j < n}``.

    Within each block all row/column indices are pairwise distinct, so the
    block's planar rotations commute and exponentials decouple.
    """

    n: int
    blocks: tuple

    def __post_init__(self):
        all_pairs = set(linalg.strict_upper_pairs(self.n))
        seen = set()
        for block in self.blocks:
            used: set[int] = set()
            for i, j in block:
                if not (0 <= i < j < self.n):
                    raise ValueError(f"invalid pair ({i}, {j}) for n={self.n}")
                if (i, j) in seen:
                    raise ValueError(f"pair ({i}, {j}) appears in more than one block")
                if i in used or j in used:
                    raise ValueError(f"indices of pair ({i}, {j}) overlap within a block")
                seen.add((i, j))
                used.add(i)
                used.add(j)
        if seen != all_pairs:
            raise ValueError("blocks must cover every index pair exactly once")

    @property
    def block_count(self) -> int:
        return len(self.blocks)


def singleton_partition(n: int) -> GivensPartition:
    """One block per index pair, lexicographic order; m = n(n-1)/2."""
    return GivensPartition(n, tuple((pair,) for pair in linalg.strict_upper_pairs(n)))


def matching_partition(n: int) -> GivensPartition:
    """Round-robin perfect matchings (circle method).

    For even n: n-1 blocks of n/2 disjoint pairs; for odd n: n blocks of
    (n-1)/2 pairs (one idle index per round).  Maximal per-block disjoint
    parallel work.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    odd = n % 2 == 1
    size = n + 1 if odd else n  # odd n gets a dummy vertex, whose pairs are dropped
    blocks = []
    for r in range(size - 1):
        pairs = [(size - 1, r)]
        for i in range(1, size // 2):
            pairs.append(((r + i) % (size - 1), (r - i) % (size - 1)))
        block = [(min(i, j), max(i, j)) for i, j in pairs if not (odd and max(i, j) == n)]
        blocks.append(tuple(sorted(block)))
    return GivensPartition(n, tuple(blocks))


class GivensRule(DeterministicRule):
    """Deterministic rule on O_n: mask skew coefficients to a pair block.

    Block ``k`` at ``Y`` projects ``Y A`` onto ``span{Y H_{ij} : (i, j) in
    I_k}`` by zeroing every coefficient entry outside the block's pairs.
    """

    def __init__(self, manifold: Orthogonal, partition: GivensPartition):
        if partition.n != manifold.n:
            raise ValueError("partition dimension does not match the manifold")
        self.manifold = manifold
        self.partition = partition
        self.block_count = partition.block_count

    def projection(self, y, k: int) -> SubspaceProjection:
        if not 0 <= k < self.block_count:
            raise ValueError(f"block index {k} out of range")
        pairs = self.partition.blocks[k]
        n = self.manifold.n

        def apply_coeff(a):
            out = np.zeros((n, n))
            for i, j in pairs:
                out[i, j] = a[i, j]
                out[j, i] = a[j, i]
            return out

        return SubspaceProjection(
            self.manifold, y, apply_coeff, len(pairs), {"kind": "givens", "block": k, "pairs": pairs}
        )

    def select(self, y0, y_prev, k: int) -> SubspaceProjection:
        return self.projection(y_prev, k)


class RandomizedFiniteRule(RandomizedRule):
    """Draw block ``k`` of a point-dependent orthogonal decomposition w.p. p_k.

    Satisfies the randomized norm condition with ``C^2 = min_k p_k``.
    """

    def __init__(self, manifold: Manifold, decomp_factory: Callable, probabilities, seed):
        super().__init__(probabilities, seed)
        self.manifold = manifold
        self.decomp_factory = decomp_factory

    def draw(self, x) -> SubspaceProjection:
        k = int(self.rng.choice(len(self.probabilities), p=self.probabilities))
        decomp = self.decomp_factory(x)
        if len(decomp) != len(self.probabilities):
            raise ValueError("decomposition size does not match the probability vector")
        return decomp[k]


class RandomizedOrthogonalRule(RandomizedRule):
    """Rank-one rule on O_n: project onto ``span(X H_{ij})`` w.p. ``p_{ij}``.

    The pair directions are orthogonal under the trace metric, so
    ``C^2 = min p_{ij}``.
    """

    def __init__(self, manifold: Orthogonal, probabilities=None, seed=None):
        self.pairs = linalg.strict_upper_pairs(manifold.n)
        if probabilities is None:
            probabilities = np.full(len(self.pairs), 1.0 / len(self.pairs))
        super().__init__(probabilities, seed)
        if len(self.probabilities) != len(self.pairs):
            raise ValueError(f"need one probability per pair ({len(self.pairs)})")
        self.manifold = manifold

    def projection(self, x, pair_index: int) -> SubspaceProjection:
        i, j = self.pairs[pair_index]
        n = self.manifold.n

        def apply_coeff(a):
            out = np.zeros((n, n))
            out[i, j] = a[i, j]
            out[j, i] = a[j, i]
            return out

        return SubspaceProjection(
            self.manifold, x, apply_coeff, 1, {"kind": "givens", "pairs": ((i, j),)}
        )

    def draw(self, x) -> SubspaceProjection:
        idx = int(self.rng.choice(len(self.pairs), p=self.probabilities))
        return self.projection(x, idx)

    def projection_energy_samples(self, x, w: Tangent, n_samples: int, rng) -> np.ndarray:
        """Vectorized ||P w||^2 samples (for Monte Carlo estimation)."""
        a = w.coeff
        energies = np.array([2.0 * a[i, j] ** 2 for i, j in self.pairs])
        idx = rng.choice(len(self.pairs), size=n_samples, p=self.probabilities)
        return energies[idx]


class RandomizedStiefelRule(RandomizedRule):
    """Randomized rank-one rule on St(p, n), p < n.

    With probability ``p_{ij}`` project onto ``span(U H_{ij})``; with
    probability ``p_l`` draw ``v`` uniformly on the unit sphere of
    ``ker(U^T)`` (Gaussian, project, normalize) and project onto
    ``span(v e_l^T)``.  Satisfies the randomized norm condition with
    ``C^2 = min(min p_{ij}, min p_l / (n - p))``.
    """

    def __init__(self, manifold: Stiefel, pair_probs=None, column_probs=None, seed=None):
        self.manifold = manifold
        p = manifold.p
        self.pairs = linalg.strict_upper_pairs(p)
        n_outcomes = len(self.pairs) + p
        if pair_probs is None and column_probs is None:
            probs = np.full(n_outcomes, 1.0 / n_outcomes)
        elif pair_probs is not None and column_probs is not None:
            probs = np.concatenate([np.asarray(pair_probs, float), np.asarray(column_probs, float)])
        else:
            raise ValueError("give both pair and column probabilities, or neither")
        super().__init__(probs, seed)
        if len(self.probabilities) != n_outcomes:
            raise ValueError(f"need {len(self.pairs)} pair and {p} column probabilities")
        self._draw_count = 0

    @property
    def c_squared(self) -> float:
        npairs = len(self.pairs)
        pmin_pairs = self.probabilities[:npairs].min() if npairs else np.inf
        pmin_cols = self.probabilities[npairs:].min() / (self.manifold.n - self.manifold.p)
        return float(min(pmin_pairs, pmin_cols))

    def _kernel_unit_vector(self, x, rng) -> np.ndarray:
        retry = 0
        while True:
            z = rng.standard_normal(self.manifold.n)
            v = z - x @ (x.T @ z)
            nv = np.linalg.norm(v)
            if nv >= 1e-12:
                return v / nv
            # essentially impossible; reseed deterministically so reruns agree
            retry += 1
            rng = np.random.default_rng([self.seed or 0, self._draw_count, retry])

    def draw(self, x) -> SubspaceProjection:
        self._draw_count += 1
        idx = int(self.rng.choice(len(self.probabilities), p=self.probabilities))
        if idx < len(self.pairs):
            i, j = self.pairs[idx]
            h = linalg.pair_matrix(i, j, self.manifold.p)
            direction = Tangent(x, x @ h)
            return rank_one_projection(
                self.manifold, x, direction, {"kind": "stiefel-pair", "pair": (i, j)}
            )
        col = idx - len(self.pairs)
        v = self._kernel_unit_vector(x, self.rng)
        coeff = np.zeros((self.manifold.n, self.manifold.p))
        coeff[:, col] = v
        direction = Tangent(x, coeff)
        return rank_one_projection(
            self.manifold, x, direction, {"kind": "stiefel-column", "column": col}
        )

    def projection_energy_samples(self, x, w: Tangent, n_samples: int, rng) -> np.ndarray:
        """Vectorized ||P w||^2 samples for Monte Carlo estimation.

        For a pair outcome the squared coefficient is ``a_{ij}^2``; for a
        column outcome it is ``(v^T b_l)^2`` with a fresh kernel-sphere
        sample ``v`` per draw.
        """
        n, p = self.manifold.n, self.manifold.p
        a = linalg.skew_part(x.T @ w.coeff)
        kernel = w.coeff - x @ (x.T @ w.coeff)  # columns are b_l
        out = np.empty(n_samples)
        idx = rng.choice(len(self.probabilities), size=n_samples, p=self.probabilities)
        for o, (i, j) in enumerate(self.pairs):
            out[idx == o] = a[i, j] ** 2
        for col in range(p):
            mask = idx == (len(self.pairs) + col)
            cnt = int(mask.sum())
            if cnt == 0:
                continue
            z = rng.standard_normal((cnt, n))
            v = z - (z @ x) @ x.T
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            out[mask] = (v @ kernel[:, col]) ** 2
        return out


def parallel_transport_rule(manifold: Manifold, decomp_factory: Callable) -> ParallelTransportRule:
    return ParallelTransportRule(manifold, decomp_factory)


def product_rule(manifold: Product) -> ProductRule:
    return ProductRule(manifold)


def givens_rule(manifold: Orthogonal, partition: GivensPartition) -> GivensRule:
    return GivensRule(manifold, partition)


def randomized_finite_rule(manifold, decomp_factory, probabilities, seed) -> RandomizedFiniteRule:
    return RandomizedFiniteRule(manifold, decomp_factory, probabilities, seed)


def randomized_orthogonal_rule(manifold: Orthogonal, probabilities=None, seed=None) -> RandomizedOrthogonalRule:
    return RandomizedOrthogonalRule(manifold, probabilities, seed)


def randomized_stiefel_rule(
    manifold: Stiefel, pair_probs=None, column_probs=None, seed=None
) -> RandomizedStiefelRule:
    return RandomizedStiefelRule(manifold, pair_probs, column_probs, seed)
