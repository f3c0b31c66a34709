"""Unit and property tests for the GF(2) linear algebra core.

The oracle for rank is an independent dense Gaussian elimination written from
scratch here (plain row-major pivoting, no shared code with the library).
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavqec.gf2 import BitMatrix, BitVector, in_rowspace, kernel_basis, rank, solve


def oracle_rank(dense):
    a = np.array(dense, dtype=np.uint8) % 2
    m, n = a.shape
    r = 0
    for col in range(n):
        piv = None
        for i in range(r, m):
            if a[i, col]:
                piv = i
                break
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(m):
            if i != r and a[i, col]:
                a[i] ^= a[r]
        r += 1
    return r


dense_matrices = st.integers(1, 8).flatmap(
    lambda m: st.integers(1, 8).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(0, 1), min_size=n, max_size=n),
            min_size=m, max_size=m)))


def test_bitvector_roundtrip():
    v = BitVector(6, (4, 1, 4))
    assert v.support == (1, 4)
    assert v.weight == 2
    assert np.array_equal(v.to_dense(), [0, 1, 0, 0, 1, 0])
    assert BitVector.from_dense(v.to_dense()) == v


def test_bitvector_xor():
    a = BitVector(5, (0, 2))
    b = BitVector(5, (2, 4))
    assert (a ^ b).support == (0, 4)


def test_bitvector_bounds():
    with pytest.raises(ValueError):
        BitVector(3, (3,))


def test_bitmatrix_dense_roundtrip():
    d = np.array([[1, 0, 1], [0, 0, 0], [0, 1, 1]], dtype=np.uint8)
    M = BitMatrix.from_dense(d)
    assert M.row_supports == ((0, 2), (), (1, 2))
    assert np.array_equal(M.to_dense(), d)


def test_bitmatrix_text_roundtrip():
    M = BitMatrix(3, 4, ((0, 3), (), (1, 2)))
    text = M.to_text()
    assert text.splitlines()[0] == "3 4"
    assert BitMatrix.from_text(text) == M


def test_transpose_and_matmul():
    M = BitMatrix.from_dense([[1, 1, 0], [0, 1, 1]])
    Mt = M.transpose()
    assert np.array_equal(Mt.to_dense(), M.to_dense().T)
    prod = M.matmul(Mt)
    expect = (M.to_dense().astype(int) @ M.to_dense().T.astype(int)) % 2
    assert np.array_equal(prod.to_dense(), expect)


def test_matvec():
    M = BitMatrix.from_dense([[1, 1, 0], [0, 1, 1]])
    v = BitVector(3, (1,))
    assert M.matvec(v).support == (0, 1)


def test_rank_fixed_cases():
    assert rank(BitMatrix.identity(5)) == 5
    assert rank(BitMatrix.zeros(3, 4)) == 0
    # Circulant of 1 + x over 5 bits has a one-dimensional kernel (all-ones).
    circ = BitMatrix(5, 5, tuple((i, (i + 1) % 5) for i in range(5)))
    assert rank(circ) == 4


@settings(max_examples=200, deadline=None)
@given(dense_matrices)
def test_rank_matches_oracle(dense):
    assert rank(BitMatrix.from_dense(dense)) == oracle_rank(dense)


@settings(max_examples=200, deadline=None)
@given(dense_matrices)
def test_rank_nullity(dense):
    M = BitMatrix.from_dense(dense)
    K = kernel_basis(M)
    assert rank(M) + K.rows == M.cols
    assert rank(K) == K.rows
    Md = M.to_dense().astype(int)
    for i in range(K.rows):
        assert not np.any((Md @ K.row(i).to_dense()) % 2)


@settings(max_examples=200, deadline=None)
@given(dense_matrices, st.randoms(use_true_random=False))
def test_solve_feasible_systems(dense, rng):
    M = BitMatrix.from_dense(dense)
    x = BitVector(M.cols, [j for j in range(M.cols) if rng.random() < 0.5])
    s = M.matvec(x)
    x2 = solve(M, s)
    assert x2 is not None
    assert M.matvec(x2) == s


def test_solve_infeasible():
    M = BitMatrix.from_dense([[1, 1], [1, 1]])
    assert solve(M, BitVector(2, (0,))) is None


@settings(max_examples=200, deadline=None)
@given(dense_matrices, st.randoms(use_true_random=False))
def test_in_rowspace(dense, rng):
    M = BitMatrix.from_dense(dense)
    combo = [i for i in range(M.rows) if rng.random() < 0.5]
    v = BitVector(M.cols)
    for i in combo:
        v = v ^ M.row(i)
    assert in_rowspace(M, v)
    # A vector outside the span must be rejected: append it and rank grows.
    w = BitVector(M.cols, tuple(range(M.cols)))
    grown = rank(M.stack(BitMatrix(1, M.cols, (w.support,))))
    assert in_rowspace(M, w) == (grown == rank(M))
