import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsd import linalg
from tsd.errors import CutLocusError

from oracles import taylor_expm


def test_expm_skew_zero_is_identity():
    assert np.array_equal(linalg.expm_skew(np.zeros((3, 3))), np.eye(3))


def test_expm_skew_quarter_turn():
    c = (np.pi / 2) * linalg.pair_matrix(0, 1, 2)
    q = linalg.expm_skew(c)
    assert np.allclose(q, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-15)


def test_expm_skew_matches_taylor_oracle():
    rng = np.random.default_rng(42)
    c = linalg.random_skew(5, rng)
    q = linalg.expm_skew(c)
    assert np.linalg.norm(q.T @ q - np.eye(5)) <= 1e-12
    assert np.linalg.norm(q - taylor_expm(c)) <= 1e-12


@pytest.mark.parametrize("n", [2, 5, 11, 20])
def test_expm_skew_orthogonal_unit_determinant(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        q = linalg.expm_skew(linalg.random_skew(n, rng))
        assert np.linalg.norm(q.T @ q - np.eye(n)) <= 1e-12 * n
        assert np.linalg.det(q) == pytest.approx(1.0, abs=1e-10)


def test_expm_skew_rejects_non_skew():
    with pytest.raises(ValueError):
        linalg.expm_skew(np.eye(3))
    with pytest.raises(ValueError):
        linalg.expm_skew(np.zeros((2, 3)))


@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
@settings(max_examples=50, deadline=None)
def test_expm_skew_orthogonality_property(a, b, c):
    m = np.array([[0.0, a, b], [-a, 0.0, c], [-b, -c, 0.0]])
    q = linalg.expm_skew(m)
    assert np.linalg.norm(q.T @ q - np.eye(3)) <= 1e-12


class TestExpmGivens:
    def test_empty_is_identity(self):
        assert np.array_equal(linalg.expm_givens([], 4), np.eye(4))

    @pytest.mark.parametrize("angle", [0.0, 0.3, -1.2, np.pi / 2, 3.0])
    def test_single_pair_matches_expm_skew(self, angle):
        q = linalg.expm_givens([(0, 1, angle)], 3)
        c = angle * linalg.pair_matrix(0, 1, 3)
        assert np.linalg.norm(q - linalg.expm_skew(c)) <= 1e-14

    def test_two_disjoint_pairs_match_expm_skew(self):
        pairs = [(0, 2, 0.7), (1, 3, -1.1)]
        q = linalg.expm_givens(pairs, 5)
        c = 0.7 * linalg.pair_matrix(0, 2, 5) - 1.1 * linalg.pair_matrix(1, 3, 5)
        assert np.linalg.norm(q - linalg.expm_skew(c)) <= 1e-12

    def test_rejects_overlapping_indices(self):
        with pytest.raises(ValueError, match="overlap"):
            linalg.expm_givens([(0, 1, 0.5), (1, 2, 0.5)], 4)

    def test_rejects_bad_pair(self):
        with pytest.raises(ValueError):
            linalg.expm_givens([(2, 1, 0.5)], 4)
        with pytest.raises(ValueError):
            linalg.expm_givens([(0, 4, 0.5)], 4)

    def test_brute_force_equivalence_seeded(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 13))
            perm = rng.permutation(n)
            pairs = []
            c = np.zeros((n, n))
            for a in range(0, n - 1, 2):
                i, j = sorted((int(perm[a]), int(perm[a + 1])))
                ang = float(rng.uniform(-np.pi, np.pi))
                pairs.append((i, j, ang))
                c += ang * linalg.pair_matrix(i, j, n)
            assert np.linalg.norm(linalg.expm_givens(pairs, n) - linalg.expm_skew(c)) <= 1e-12


class TestLogmOrthogonal:
    def test_identity(self):
        assert np.allclose(linalg.logm_orthogonal(np.eye(4)), 0.0)

    def test_roundtrip_single_angle(self):
        c = 0.3 * linalg.pair_matrix(0, 1, 3)
        q = linalg.expm_skew(c)
        assert np.linalg.norm(linalg.logm_orthogonal(q) - c) <= 1e-12

    def test_rotation_by_pi_fails(self):
        q = linalg.expm_skew(np.pi * linalg.pair_matrix(0, 1, 2))
        with pytest.raises(CutLocusError):
            linalg.logm_orthogonal(q)

    def test_reflection_fails(self):
        q = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(CutLocusError):
            linalg.logm_orthogonal(q)

    def test_rejects_non_orthogonal(self):
        with pytest.raises(ValueError):
            linalg.logm_orthogonal(2.0 * np.eye(3))

    def test_roundtrip_away_from_branch_boundary(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(2, 9))
            c = linalg.random_skew(n, rng)
            angles = np.abs(np.linalg.eigvals(c).imag)
            amax = angles.max() if angles.size else 0.0
            if amax > 0:
                c *= (np.pi - 0.1) * rng.uniform(0.1, 1.0) / amax
            q = linalg.expm_skew(c)
            c_back = linalg.logm_orthogonal(q)
            assert np.linalg.norm(c_back - c) <= 1e-10
            assert np.linalg.norm(c_back + c_back.T) == 0.0


class TestRandomOrthogonal:
    def test_n1(self):
        q = linalg.random_orthogonal(1, 0)
        assert q.shape == (1, 1) and abs(abs(q[0, 0]) - 1.0) <= 1e-15

    def test_deterministic(self):
        assert np.array_equal(linalg.random_orthogonal(10, 123), linalg.random_orthogonal(10, 123))

    def test_orthogonality_residual(self):
        q = linalg.random_orthogonal(50, 5)
        assert np.linalg.norm(q.T @ q - np.eye(50)) <= 1e-12

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            linalg.random_orthogonal(0, 1)


class TestOrthComplement:
    def test_identity_columns(self):
        u = np.eye(6)[:, :2]
        perp = linalg.orth_complement_basis(u)
        assert perp.shape == (6, 4)
        assert np.linalg.norm(perp.T @ perp - np.eye(4)) <= 1e-12
        assert np.linalg.norm(u.T @ perp) <= 1e-12

    def test_random_frame(self):
        rng = np.random.default_rng(3)
        z = rng.standard_normal((8, 3))
        u, _ = np.linalg.qr(z)
        perp = linalg.orth_complement_basis(u)
        assert np.linalg.norm(u.T @ perp) <= 1e-12
        assert np.linalg.norm(perp.T @ perp - np.eye(5)) <= 1e-12

    def test_square_frame_rejected(self):
        with pytest.raises(ValueError):
            linalg.orth_complement_basis(np.eye(4))

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ValueError):
            linalg.orth_complement_basis(np.ones((5, 2)))
