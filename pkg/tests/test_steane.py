"""Tests for the dense cat-ancilla syndrome-extraction verifier.

Oracles: closed-form collective-spin algebra (commutators, Casimir),
independently constructed GHZ states, and exact operator identities checked
matrix-elementwise.  The first-order error map is checked against finite
differences of the exact finite-cooperativity map on a cooperativity grid.
"""

from math import inf, pi

import numpy as np
import pytest

from cavqec import steane
from cavqec.steane import (
    CavityParams,
    CollectiveOps,
    encode_map,
    encoder_unitary,
    first_order_map,
    ghz_merge_check,
    heisenberg_check,
    operator_on,
    pauli_string,
    phase_map,
    run_case,
    symmetric_projector,
    syndrome_table,
    verification_report,
)

TOL = 1e-12


def test_collective_ops_commutators():
    ops = CollectiveOps.build(3)
    assert np.abs(ops.jx @ ops.jy - ops.jy @ ops.jx - 1j * ops.jz).max() < TOL
    assert np.abs(ops.jy @ ops.jz - ops.jz @ ops.jy - 1j * ops.jx).max() < TOL
    casimir = ops.jx @ ops.jx + ops.jy @ ops.jy + ops.jz @ ops.jz
    # On the symmetric subspace the Casimir is j(j+1) with j = n/2.
    proj = symmetric_projector(3)
    want = 1.5 * 2.5
    assert np.abs(proj @ casimir @ proj - want * proj).max() < TOL


def test_symmetric_projector_is_projector():
    proj = symmetric_projector(4)
    assert np.abs(proj @ proj - proj).max() < TOL
    assert abs(np.trace(proj).real - 5) < TOL  # dimension n + 1


def test_cavity_params_validation():
    with pytest.raises(ValueError):
        CavityParams(cooperativity=0.0)
    with pytest.raises(ValueError):
        CavityParams(n=0)
    p = CavityParams(n=4)
    assert abs(p.d_n - (2 * (1 + 2 ** -4)) ** -0.5) < TOL
    assert CavityParams(cooperativity=inf).flip_probability == 0.0


def test_phase_map_rejects_asymmetric_states():
    rho = np.zeros((16, 16), dtype=complex)
    rho[1, 1] = 1.0  # |0001> alone is not symmetric
    with pytest.raises(ValueError):
        phase_map(rho, CavityParams())


def test_phase_map_infinite_c_is_unitary_diagonal_phase():
    # At infinite cooperativity the map preserves trace and the diagonal.
    rng = np.random.default_rng(5)
    proj = symmetric_projector(4)
    raw = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    rho = proj @ (raw @ raw.conj().T) @ proj
    rho /= np.trace(rho).real
    out = phase_map(rho, CavityParams())
    assert abs(np.trace(out) - 1.0) < TOL
    assert np.abs(np.diag(out) - np.diag(rho)).max() < TOL


def test_phase_map_finite_c_subnormalizes():
    proj = symmetric_projector(4)
    rho = proj / np.trace(proj).real
    out = phase_map(rho, CavityParams(cooperativity=1e4))
    tr = np.trace(out).real
    assert tr < 1.0
    assert tr > 0.9


def test_encoder_makes_cat_state():
    for n in (2, 3, 4):
        u = encoder_unitary(n)
        assert np.abs(u @ u.conj().T - np.eye(2 ** n)).max() < TOL
    # For four qubits the encoder sends |0000> to the reference cat state.
    u = encoder_unitary(4)
    vec = np.zeros(16, dtype=complex)
    vec[0] = 1.0
    out = u @ vec
    cat = np.zeros(16, dtype=complex)
    cat[0], cat[-1] = 1j, 1.0
    cat /= 2 ** 0.5
    assert abs(1.0 - abs(np.vdot(cat, out)) ** 2) < TOL


def test_encode_map_matches_encoder_unitary_at_infinite_c():
    rng = np.random.default_rng(11)
    proj = symmetric_projector(4)
    raw = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    rho = proj @ (raw @ raw.conj().T) @ proj
    rho /= np.trace(rho).real
    u = encoder_unitary(4)
    want = u @ rho @ u.conj().T
    got = encode_map(rho, CavityParams())
    assert np.abs(got - want).max() < 1e-10


def test_first_order_map_matches_exact_map_on_c_grid():
    # Diagonal Z-basis populations of the exact finite-C encode map (after
    # renormalization, which cancels the uniform trace-damping the first-order
    # form drops) agree with the first-order map to O(1/C): the scaled
    # residual |diff| * C stays bounded across three decades.
    vec = np.zeros(16, dtype=complex)
    vec[0] = 1.0
    rho = np.outer(vec, vec.conj())
    scaled = []
    for c in (1e4, 1e5, 1e6):
        params = CavityParams(cooperativity=c)
        exact = encode_map(rho, params)
        approx = first_order_map(rho, params)
        exact = exact / np.trace(exact).real
        approx = approx / np.trace(approx).real
        diff = np.abs(np.diag(exact) - np.diag(approx)).real.max()
        scaled.append(diff * c)
    assert max(scaled) < 2 * min(scaled)  # constant under 1/C scaling
    assert scaled[-1] < 100.0


def test_heisenberg_identities():
    report = heisenberg_check()
    assert report["ok"]
    assert max(report["deviations"].values()) < TOL
    # Independent elementwise re-check of the headline identities.
    u = encoder_unitary(4)
    got = u @ pauli_string(4, "ZIII") @ u.conj().T
    assert np.abs(got + pauli_string(4, "YXXX")).max() < TOL
    got = u @ pauli_string(4, "YIII") @ u.conj().T
    assert np.abs(got - pauli_string(4, "ZXXX")).max() < TOL


def test_perfect_round_is_deterministic():
    out = run_case("perfect_perfect")
    assert out["deterministic"]
    assert out["pattern"] == 0
    assert abs(out["data_fidelity"] - 1.0) < TOL


def test_run_case_rejects_unknown():
    with pytest.raises(ValueError):
        run_case("bogus")


def test_syndrome_table_all_16_terms_verified():
    table = syndrome_table()
    assert len(table) == 16
    assert all(e["verified"] for e in table)
    # The claimed data-qubit mapping: ancilla i couples data 8 - i and the
    # partners are exactly the other three coupled qubits.
    for e in table:
        assert e["p"] == 8 - e["i"]
        assert e["q"] == 8 - e["j"]
        assert set(e["partners_i"]) == {4, 5, 6, 7} - {e["p"]}
        assert set(e["partners_j"]) == {4, 5, 6, 7} - {e["q"]}


def test_faulty_encode_flags_the_flipped_ancilla():
    out = run_case("faulty_encode", CavityParams(cooperativity=1e6))
    assert out["table_verified"]
    patterns = set(out["blocks"])
    # Present patterns: the unflipped pair {0000, 1111} plus every
    # single-flip pattern and its three-flip complement.
    singles = {1, 2, 4, 8}
    assert {0, 15} | singles | {15 ^ s for s in singles} == patterns


def test_faulty_decode_leaves_data_untouched():
    out = run_case("faulty_decode", CavityParams(cooperativity=1e6))
    assert out["data_untouched"]
    assert set(out["blocks"]) == {0, 1, 2, 4, 8}


def test_ghz_merge_both_outcomes():
    report = ghz_merge_check()
    assert report["ok"]
    for m, res in report["outcomes"].items():
        assert abs(res["probability"] - 0.5) < TOL
        assert abs(res["fidelity"] - 1.0) < TOL
        if m == 1:
            # Before correction the m = 1 branch is the half-flipped state.
            assert res["fidelity_before_correction"] < TOL
            assert abs(res["flipped_branch_fidelity"]) < TOL


def test_verification_report_passes():
    report = verification_report(1e6)
    assert report["ok"]
    names = {c["name"] for c in report["checks"]}
    assert "syndrome_table_16_terms" in names
    assert "ghz_merge_both_branches" in names


def test_operator_on_ordering():
    # Qubit 0 is the most significant factor.
    z0 = operator_on(2, {0: steane.PAULI["Z"]})
    assert np.abs(np.diag(z0) - np.array([1, 1, -1, -1])).max() < TOL
    with pytest.raises(ValueError):
        pauli_string(3, "XX")
