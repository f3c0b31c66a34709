"""Tests for circulant code and hypergraph-product construction."""

import json

import numpy as np
import pytest

from cavqec.codes import (
    CheckPolynomial,
    CssCode,
    build_code,
    circulant_from_polynomial,
    code_parameters,
    compute_distance,
    hypergraph_product,
    layout,
    logical_operators,
    open_boundary,
    sector1_representative,
)
from cavqec.gf2 import BitMatrix, BitVector, in_rowspace, rank


def test_polynomial_from_coefficients():
    h = CheckPolynomial.from_coefficients([1, 1, 1])
    assert h.exponents == frozenset({0, 1, 2})
    assert h.degree == 2
    with pytest.raises(ValueError):
        CheckPolynomial(frozenset())


def test_circulant_rep5():
    H = circulant_from_polynomial(CheckPolynomial.from_coefficients([1, 1]), 5)
    expect = np.array([
        [1, 1, 0, 0, 0],
        [0, 1, 1, 0, 0],
        [0, 0, 1, 1, 0],
        [0, 0, 0, 1, 1],
        [1, 0, 0, 0, 1]], dtype=np.uint8)
    assert np.array_equal(H.to_dense(), expect)


def test_circulant_identity_polynomial():
    H = circulant_from_polynomial(CheckPolynomial.from_coefficients([1]), 3)
    assert np.array_equal(H.to_dense(), np.eye(3, dtype=np.uint8))


def test_circulant_rejects_large_exponent():
    with pytest.raises(ValueError):
        circulant_from_polynomial(CheckPolynomial.from_coefficients([1, 0, 0, 1]), 3)


def test_circulant_15_7_5_classical_code():
    # 1 + x + x^3 + x^7 at lift 15 checks a [15,7,5] classical code: the
    # dimension follows from the rank and the distance from an exhaustive
    # sweep of all 2^7 codewords through the kernel basis.
    from cavqec.gf2 import kernel_basis
    from itertools import combinations

    H = circulant_from_polynomial(
        CheckPolynomial.from_coefficients([1, 1, 0, 1, 0, 0, 0, 1]), 15)
    K = kernel_basis(H)
    assert K.rows == 7
    dense = K.to_dense()
    weights = []
    for r in range(1, 1 << 7):
        combo = np.bitwise_xor.reduce(
            [dense[i] for i in range(7) if (r >> i) & 1], axis=0)
        weights.append(int(combo.sum()))
    assert min(weights) == 5


def test_open_boundary_rep5():
    H = circulant_from_polynomial(CheckPolynomial.from_coefficients([1, 1]), 5)
    Ht = open_boundary(H, 1)
    assert Ht.rows == 4 and Ht.cols == 5
    assert rank(Ht) == 4
    assert Ht.row_supports == ((0, 1), (1, 2), (2, 3), (3, 4))
    assert open_boundary(H, 0) == H
    with pytest.raises(ValueError):
        open_boundary(H, 5)


def test_open_boundary_rep3():
    H = circulant_from_polynomial(CheckPolynomial.from_coefficients([1, 1]), 3)
    Ht = open_boundary(H, 1)
    assert np.array_equal(Ht.to_dense(), [[1, 1, 0], [0, 1, 1]])


def surface_41() -> CssCode:
    H = open_boundary(
        circulant_from_polynomial(CheckPolynomial.from_coefficients([1, 1]), 5), 1)
    return hypergraph_product(H, H, boundary="open")


def test_hgp_surface_code_parameters():
    code = surface_41()
    assert code_parameters(code) == (41, 1)
    assert code.sector1_count == 25


def test_hgp_72_8_parameters():
    code = build_code([1, 1, 1], 6)
    assert code_parameters(code) == (72, 8)
    # Periodic weight-3 polynomial products have uniform weight-6 checks.
    assert all(len(r) == 6 for r in code.g_x.row_supports)
    assert all(len(r) == 6 for r in code.g_z.row_supports)


def test_hgp_toric_code():
    code = build_code([1, 1], 2)
    assert code_parameters(code) == (8, 2)
    assert compute_distance(code, 2) == {"exact": 2}


def test_hgp_commutation_and_dimension_formulas():
    rng = np.random.default_rng(7)
    for _ in range(100):
        r1, n1 = rng.integers(1, 5), rng.integers(1, 5)
        r2, n2 = rng.integers(1, 5), rng.integers(1, 5)
        H1 = BitMatrix.from_dense(rng.integers(0, 2, (r1, n1), dtype=np.uint8))
        H2 = BitMatrix.from_dense(rng.integers(0, 2, (r2, n2), dtype=np.uint8))
        code = hypergraph_product(H1, H2)
        prod = code.g_x.matmul(code.g_z.transpose())
        assert not any(prod.row_supports)
        assert code.n == n1 * n2 + r1 * r2
        k1, k2 = n1 - rank(H1), n2 - rank(H2)
        k1t, k2t = r1 - rank(H1), r2 - rank(H2)
        _, k = code_parameters(code)
        assert k == k1 * k2 + k1t * k2t


def test_distance_surface_13():
    H = open_boundary(
        circulant_from_polynomial(CheckPolynomial.from_coefficients([1, 1]), 3), 1)
    code = hypergraph_product(H, H, boundary="open")
    assert code_parameters(code) == (13, 1)
    assert compute_distance(code, 3) == {"exact": 3}


def test_distance_lower_bound():
    code = surface_41()
    assert compute_distance(code, 1) == {"lower_bound": 2}
    with pytest.raises(ValueError):
        compute_distance(code, 0)


def test_logical_operators_pairing():
    for code in (build_code([1, 1], 2), build_code([1, 1, 1], 6)):
        n, k = code_parameters(code)
        basis = logical_operators(code)
        lx, lz = basis.logical_x, basis.logical_z
        assert lx.rows == k and lz.rows == k
        P = (lx.to_dense().astype(int) @ lz.to_dense().T.astype(int)) % 2
        assert np.array_equal(P, np.eye(k, dtype=int))
        # Commute with all opposite-type generators, outside same-type rowspace.
        assert not np.any((code.g_z.to_dense().astype(int) @ lx.to_dense().T) % 2)
        assert not np.any((code.g_x.to_dense().astype(int) @ lz.to_dense().T) % 2)
        for i in range(k):
            assert not in_rowspace(code.g_x, lx.row(i))
            assert not in_rowspace(code.g_z, lz.row(i))


def test_logical_operators_rejects_k0():
    H = BitMatrix.identity(2)
    code = hypergraph_product(H, H)
    with pytest.raises(ValueError):
        logical_operators(code)


def test_surface_code_sector1_logicals():
    code = surface_41()
    basis = logical_operators(code)
    s1 = code.sector1_count
    lx = sector1_representative(code, basis.logical_x.row(0), "X")
    lz = sector1_representative(code, basis.logical_z.row(0), "Z")
    assert all(q < s1 for q in lx.support)
    assert all(q < s1 for q in lz.support)
    # Representatives stay logical: commute with opposite checks, anticommute
    # with each other.
    assert not code.g_z.matvec(lx).support
    assert not code.g_x.matvec(lz).support
    assert len(set(lx.support) & set(lz.support)) % 2 == 1


def test_layout_surface_41():
    lay = layout(surface_41())
    assert (lay.grid_rows, lay.grid_cols) == (9, 9)
    assert len(set(lay.coordinate)) == 41


def test_layout_72():
    code = build_code([1, 1, 1], 6)
    lay = layout(code)
    assert (lay.grid_rows, lay.grid_cols) == (12, 12)
    # Each check occupies exactly one grid row plus one grid column.
    for sup, (r, c) in zip(code.g_x.row_supports, lay.x_stab_support):
        assert all(lay.coordinate[q][0] == r or lay.coordinate[q][1] == c
                   for q in sup)
    for sup, (r, c) in zip(code.g_z.row_supports, lay.z_stab_support):
        assert all(lay.coordinate[q][0] == r or lay.coordinate[q][1] == c
                   for q in sup)


def test_layout_450():
    code = build_code([1, 1, 0, 1, 0, 0, 0, 1], 15)
    assert code.n == 450
    lay = layout(code)
    assert (lay.grid_rows, lay.grid_cols) == (30, 30)
    assert all(len(r) == 8 for r in code.g_x.row_supports)


def test_layout_trivial_product():
    code = build_code([1], 1)
    lay = layout(code)
    # One unit cell: a single sector-1 site with its sector-2 partner.
    assert (lay.grid_rows, lay.grid_cols) == (2, 2)


def test_layout_rejects_non_hgp():
    # Steane code checks span several rows and columns of any product grid.
    steane = BitMatrix(3, 7, ((3, 4, 5, 6), (1, 2, 5, 6), (0, 2, 4, 6)))
    code = CssCode(g_x=steane, g_z=steane, n=7, sector_of=(1,) * 6 + (2,),
                   n1=3, n2=2, r1=1, r2=1, boundary="open")
    with pytest.raises(ValueError):
        layout(code)


def test_json_roundtrip():
    code = build_code([1, 1, 1], 6)
    text = code.to_json()
    data = json.loads(text)
    assert data["n"] == 72 and data["k"] == 8
    back = CssCode.from_json(text)
    assert back.g_x == code.g_x and back.g_z == code.g_z
    assert back.sector_of == code.sector_of
