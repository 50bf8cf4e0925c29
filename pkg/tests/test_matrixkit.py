import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetacaf.errors import NumericallyRankDeficient, RankDeficient, Singular
from thetacaf.matrixkit import (
    as_int_matrix,
    column_hnf_square,
    det_and_inverse,
    hnf_zero_block,
    int_det,
    orthogonal_zero_block,
    unimodular_inverse,
)


def _is_zero_block(prod, n, m):
    return all(prod[i, j] == 0 for i in range(n) for j in range(m - n))


class TestHnfZeroBlock:
    def test_1x2_row(self):
        U, B = hnf_zero_block([[2, 1]])
        M = np.array([[2, 1]], dtype=object)
        prod = np.dot(M, U)
        assert prod[0, 0] == 0 and abs(int(prod[0, 1])) >= 1
        assert abs(int_det(U)) == 1
        assert B[0, 0] == int(prod[0, 1])

    def test_square_rejected(self):
        with pytest.raises(RankDeficient):
            hnf_zero_block(np.eye(3))

    def test_two_scaled_identity_blocks(self):
        # coprime scales make the stacked lattice all of Z^2
        M = np.hstack([2 * np.eye(2), 3 * np.eye(2)])
        U, B = hnf_zero_block(M)
        prod = np.dot(as_int_matrix(M), U)
        assert _is_zero_block(prod, 2, 4)
        assert abs(int_det(U)) == 1
        assert abs(int_det(B)) == 1

    def test_rank_deficient_rows(self):
        with pytest.raises(RankDeficient):
            hnf_zero_block([[1, 2, 3], [2, 4, 6]])

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(1, 3),
        st.integers(1, 3),
        st.data(),
    )
    def test_postconditions_random(self, n, extra, data):
        m = n + extra
        entries = data.draw(
            st.lists(st.integers(-9, 9), min_size=n * m, max_size=n * m)
        )
        M = np.array(entries, dtype=object).reshape(n, m)
        ranks = np.linalg.matrix_rank(M.astype(float))
        if ranks < n:
            with pytest.raises(RankDeficient):
                hnf_zero_block(M)
            return
        U, B = hnf_zero_block(M)
        prod = np.dot(M, U)
        assert _is_zero_block(prod, n, m)
        assert abs(int_det(U)) == 1
        assert int_det(B) != 0
        # B is the trailing block of the product
        assert all(
            prod[i, m - n + j] == B[i, j] for i in range(n) for j in range(n)
        )


class TestColumnHnfSquare:
    def test_triangular_same_lattice(self):
        T = [[2, 1], [0, 3]]
        H = column_hnf_square(T)
        assert H[0, 1] == 0 and H[0, 0] > 0 and H[1, 1] > 0
        assert abs(int_det(H)) == abs(int_det(T))

    def test_singular_rejected(self):
        with pytest.raises(RankDeficient):
            column_hnf_square([[1, 2], [2, 4]])


class TestIntDet:
    def test_identity(self):
        assert int_det(np.eye(3, dtype=int)) == 1

    def test_table_generator(self):
        assert abs(int_det([[2, 0, 0], [1, -2, 1], [0, -1, -2]])) == 10

    def test_zero(self):
        assert int_det([[1, 1], [1, 1]]) == 0


class TestUnimodularInverse:
    def test_roundtrip(self):
        U = np.array([[1, 0], [-2, 1]], dtype=object)
        V = unimodular_inverse(U)
        assert np.all(np.dot(U, V) == np.eye(2, dtype=object))

    def test_non_unimodular_rejected(self):
        with pytest.raises(ValueError):
            unimodular_inverse([[2, 0], [0, 1]])


class TestOrthogonalZeroBlock:
    def test_1x2(self):
        U, B = orthogonal_zero_block([[1.0, 0.0]])
        prod = np.array([[1.0, 0.0]]) @ U
        assert abs(prod[0, 0]) < 1e-12
        assert abs(abs(B[0, 0]) - 1.0) < 1e-12

    def test_random_residual(self):
        rng = np.random.default_rng(3)
        M = rng.standard_normal((2, 4))
        U, B = orthogonal_zero_block(M)
        prod = M @ U
        assert np.max(np.abs(prod[:, :2])) < 1e-9
        assert np.allclose(prod[:, 2:], B)
        assert np.allclose(U @ U.T, np.eye(4), atol=1e-12)

    def test_duplicate_rows_rejected(self):
        with pytest.raises(NumericallyRankDeficient):
            orthogonal_zero_block([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])


class TestDetAndInverse:
    def test_identity(self):
        det, inv = det_and_inverse(np.eye(3))
        assert det == pytest.approx(1.0)
        assert np.allclose(inv, np.eye(3))

    def test_singular(self):
        with pytest.raises(Singular):
            det_and_inverse([[1.0, 1.0], [1.0, 1.0]])
