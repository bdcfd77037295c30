import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_language, random_orthogonal, random_state, random_unitary
from rebitsim.circuit import Circuit
from rebitsim.codec import decode_operator
from rebitsim.compiler import (
    NotOrthogonalError,
    TwoLevelOrthogonal,
    decider_language,
    factor_r_unitary,
    kl_from_decider_report,
    length_bound,
    majority_decider,
    orthogonal_to_gates,
    product_of_two_level,
    restrict_to_zero_workspace,
    synthesize_kl_circuit,
    two_level_decompose,
    two_level_to_gates,
    z_family,
)
from rebitsim.gates import g, gate_to_rlinear, sequence_real_matrix
from rebitsim.rlinear import Language, RLinearOp, make_kl, reconstruct_partial_antiunitary, star_all

ALLOWED_GATE_KINDS = {"H", "X", "Z", "R", "CZ", "CCZ", "CHZ", "CX", "CCX", "CHX"}


def _random_partial_antiunitary(n, rng):
    return reconstruct_partial_antiunitary(
        random_unitary(1 << n, rng), random_language(n, rng), random_unitary(1 << n, rng)
    )


@pytest.mark.parametrize("d, count", [(2, 1), (4, 6), (8, 28), (16, 120)])
def test_two_level_counts_for_generic_orthogonals(d, count, rng):
    w = random_orthogonal(d, rng)
    factors = two_level_decompose(w)
    assert len(factors) == count
    assert np.max(np.abs(product_of_two_level(factors, d) - w)) < 1e-9


def test_two_level_of_identity_is_empty():
    assert two_level_decompose(np.eye(8)) == []


def test_two_level_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonalError):
        two_level_decompose(2 * np.eye(4))


def test_two_level_factor_shape():
    block = np.array([[0.6, 0.8], [0.8, -0.6]])
    v = TwoLevelOrthogonal(4, 3, 1, block)
    m = v.matrix()
    assert v.is_reflection
    np.testing.assert_allclose(m[np.ix_([1, 3], [1, 3])], block)
    np.testing.assert_allclose(m[np.ix_([0, 2], [0, 2])], np.eye(2))


def test_reflection_block_uses_z_family_base_case():
    v = TwoLevelOrthogonal(8, 5, 4, np.diag([1.0, -1.0]))
    gates = two_level_to_gates(v, 3)
    assert {gate.kind for gate in gates} <= ALLOWED_GATE_KINDS
    assert any(gate.kind in ("CZ", "CCZ", "CHZ", "Z") for gate in gates)
    np.testing.assert_allclose(sequence_real_matrix(gates, 3), v.matrix(), atol=1e-12)


def test_z_family_kinds():
    assert z_family([2]).kind == "Z"
    assert z_family([1, 2]).kind == "CZ"
    assert z_family([1, 2, 3]).kind == "CCZ"
    assert z_family([1, 2, 3, 4]).kind == "CHZ"


def test_random_two_level_gate_synthesis(rng):
    for _ in range(20):
        i, j = sorted(rng.choice(8, 2, replace=False))[::-1]
        theta = rng.uniform(0, 2 * math.pi)
        block = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        if rng.random() < 0.5:
            block = block @ np.diag([1.0, -1.0])
        v = TwoLevelOrthogonal(8, int(i), int(j), block)
        gates = two_level_to_gates(v, 3)
        assert np.max(np.abs(sequence_real_matrix(gates, 3) - v.matrix())) < 1e-9


def test_orthogonal_to_gates_reconstructs(rng):
    w = random_orthogonal(8, rng)
    gates = orthogonal_to_gates(w)
    assert {gate.kind for gate in gates} <= ALLOWED_GATE_KINDS
    assert np.max(np.abs(sequence_real_matrix(gates, 3) - w)) < 1e-9


@pytest.mark.parametrize("n, bound", [(1, 2), (2, 18), (3, 112), (4, 600)])
def test_length_bound_values(n, bound):
    assert length_bound(n) == bound


def test_factor_unitary_has_no_conjugations(rng):
    u = random_unitary(4, rng)
    fac = factor_r_unitary(RLinearOp.linear(u))
    assert fac.num_kl == 0 and fac.length == 1
    assert fac.residual(RLinearOp.linear(u)) < 1e-10


def test_factor_kl_of_random_language(rng):
    for _ in range(5):
        op = make_kl(random_language(2, rng))
        fac = factor_r_unitary(op)
        assert fac.residual(op) < 1e-8
        assert fac.num_kl <= 2


def test_factor_star_of_three_partial_antiunitaries(rng):
    op = star_all(*[_random_partial_antiunitary(2, rng) for _ in range(3)])
    fac = factor_r_unitary(op)
    assert fac.residual(op) < 1e-8
    assert fac.length <= length_bound(2)


@pytest.mark.parametrize("n", [1, 2])
def test_gate_pipeline_method_reconstructs(n, rng):
    op = decode_operator(random_orthogonal(2 << n, rng))
    fac = factor_r_unitary(op, method="gates")
    assert fac.method == "gates"
    assert fac.residual(op) < 1e-8
    canonical = factor_r_unitary(op)
    assert canonical.num_kl <= fac.num_kl


def test_factor_rejects_non_r_unitary():
    with pytest.raises(ValueError):
        factor_r_unitary(RLinearOp.identity(1) + RLinearOp.conjugation(1))
    with pytest.raises(ValueError):
        factor_r_unitary(RLinearOp.identity(1), method="nope")


def test_factorization_json_shape(rng):
    op = decode_operator(random_orthogonal(8, rng))
    doc = factor_r_unitary(op).to_json()
    assert {entry["type"] for entry in doc} <= {"KL", "unitary"}
    assert all(len(entry["matrix"]) == 4 for entry in doc if entry["type"] == "unitary")


def test_cck_from_toffoli_decider():
    decider = Circuit(3, [g("CCX", 1, 2, 3)])
    circ = synthesize_kl_circuit(decider, 2)
    got = restrict_to_zero_workspace(circ.rlinear(), 2)
    assert got.distance(gate_to_rlinear(g("CCK", 1, 2), 2)) < 1e-12


def test_parity_decider_matches_make_kl(rng):
    decider = Circuit(4, [g("CX", 1, 4), g("CX", 2, 4), g("CX", 3, 4)])
    lang = Language.from_predicate(3, lambda x: sum(x) % 2 == 1)
    assert decider_language(decider, 3) == lang
    block = restrict_to_zero_workspace(synthesize_kl_circuit(decider, 3).rlinear(), 3)
    kl = make_kl(lang)
    for _ in range(8):
        psi = random_state(3, rng)
        np.testing.assert_allclose(block(psi), kl(psi), atol=1e-12)


def test_majority_decider():
    lang = decider_language(majority_decider(), 3)
    assert lang.labels() == [3, 5, 6, 7]
    assert kl_from_decider_report() < 1e-12


def test_decider_validation():
    with pytest.raises(ValueError):
        synthesize_kl_circuit(Circuit(2, [g("H", 1)]), 1)
    with pytest.raises(ValueError):
        synthesize_kl_circuit(Circuit(2, [g("CX", 1, 2)]), 2)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_factor_r_unitary_property(n, seed):
    rng = np.random.default_rng(seed)
    op = decode_operator(random_orthogonal(2 << n, rng))
    fac = factor_r_unitary(op)
    assert fac.residual(op) < 1e-8
    assert fac.length <= length_bound(n)
    for f in fac.factors:
        if not isinstance(f, Language):
            np.testing.assert_allclose(f.conj().T @ f, np.eye(1 << n), atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_two_level_property(m, seed):
    rng = np.random.default_rng(seed)
    d = 1 << m
    w = random_orthogonal(d, rng)
    factors = two_level_decompose(w)
    assert len(factors) <= d * (d - 1) // 2
    assert np.max(np.abs(product_of_two_level(factors, d) - w)) < 1e-9
