import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holodfs.gates import (
    HADAMARD,
    LogicalGate,
    canonical_phase,
    closest_word,
    compose,
    gate_fidelity,
    phase_error,
    promote,
    relative_phase,
    schmidt_rank,
    target_gate,
)

X = np.array([[0, 1], [1, 0]], complex)


def test_target_examples():
    np.testing.assert_allclose(target_gate("Z_rot", 0.0), np.eye(2))
    np.testing.assert_allclose(target_gate("X_rot", 2 * np.pi), 1j * X, atol=1e-15)
    np.testing.assert_allclose(target_gate("CP", np.pi), np.diag([1, 1, 1, 1j]), atol=1e-15)


def test_target_z_form():
    np.testing.assert_allclose(target_gate("Z_rot", 1.2), np.diag([1, np.exp(-0.6j)]))


def test_unknown_gate():
    with pytest.raises(ValueError):
        target_gate("T", 0.0)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["Z_rot", "X_rot", "CP"]), st.floats(-20, 20))
def test_targets_unitary(name, w):
    u = target_gate(name, w)
    assert np.max(np.abs(u.conj().T @ u - np.eye(len(u)))) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(-20, 20))
def test_cp_diagonal(w):
    cp = target_gate("CP", w)
    assert np.count_nonzero(cp - np.diag(np.diag(cp))) == 0


def test_cp_zero_is_identity():
    np.testing.assert_array_equal(target_gate("CP", 0.0), np.eye(4))


# -- fidelity ---------------------------------------------------------------


def test_fidelity_examples():
    t = target_gate("X_rot", 1.0)
    assert gate_fidelity(t, t) == pytest.approx(1.0)
    assert gate_fidelity(t @ np.diag([1, -1]), t) == pytest.approx(0.0, abs=1e-15)


def test_fidelity_dimension_mismatch():
    with pytest.raises(ValueError):
        gate_fidelity(np.eye(2), np.eye(4))


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_fidelity_global_phase_invariant(w, a, b):
    m = target_gate("X_rot", w) @ target_gate("Z_rot", 0.3 * w)
    t = target_gate("Z_rot", w)
    f = gate_fidelity(m, t)
    assert abs(gate_fidelity(np.exp(1j * a) * m, np.exp(1j * b) * t) - f) < 1e-12
    assert 0.0 <= f <= 1.0 + 1e-12


def test_canonical_phase():
    u = np.exp(0.7j) * target_gate("Z_rot", 1.0)
    c = canonical_phase(u)
    assert c[0, 0].imag == 0 and c[0, 0].real > 0
    # X has a zero first entry; the first non-negligible one is made real
    cx = canonical_phase(1j * X)
    assert cx[0, 1] == 1


def test_phase_error_and_relative_phase():
    assert phase_error(np.diag([1, np.exp(0.3j)]), np.eye(2)) == pytest.approx(0.3)
    assert phase_error(np.exp(0.5j) * np.eye(3), np.eye(3)) == pytest.approx(0.0, abs=1e-12)
    assert relative_phase(np.diag([1j, -1])) == pytest.approx(np.pi / 2)


def test_logical_gate():
    g = LogicalGate.from_target("Z_rot", 0.4)
    assert g.fidelity == 1.0
    m = LogicalGate.measured("Z_rot", target_gate("Z_rot", 0.4), 0.4)
    assert m.fidelity == pytest.approx(1.0)


# -- composition ------------------------------------------------------------


def test_compose_inverse_pair():
    g = [LogicalGate.from_target("Z_rot", 0.8), LogicalGate.from_target("Z_rot", -0.8)]
    np.testing.assert_allclose(compose(g), np.eye(2), atol=1e-15)


def test_compose_application_order():
    a, b = target_gate("X_rot", 1.0), target_gate("Z_rot", 1.0)
    np.testing.assert_allclose(compose([a, b]), b @ a)


def test_generators_do_not_commute():
    xz = compose([target_gate("X_rot", 2 * np.pi), target_gate("Z_rot", 2 * np.pi)])
    zx = compose([target_gate("Z_rot", 2 * np.pi), target_gate("X_rot", 2 * np.pi)])
    assert np.max(np.abs(xz - zx)) > 0.5
    z, x = target_gate("Z_rot", np.pi / 2), target_gate("X_rot", np.pi / 2)
    assert np.max(np.abs(z @ x - x @ z)) > 0.1


def test_promote_and_mixed_compose():
    z = target_gate("Z_rot", 1.0)
    np.testing.assert_allclose(promote(z, 1), np.kron(z, np.eye(2)))
    np.testing.assert_allclose(promote(z, 2), np.kron(np.eye(2), z))
    cp = target_gate("CP", 1.0)
    np.testing.assert_allclose(compose([z, cp], factors=[2, 1]), cp @ np.kron(np.eye(2), z))
    with pytest.raises(ValueError):
        promote(z, 3)
    with pytest.raises(ValueError):
        compose([np.eye(3), np.eye(2)])


def test_cp_entangles():
    plus = np.array([1, 1]) / np.sqrt(2)
    psi = np.kron(plus, plus)
    assert schmidt_rank(psi) == 1
    assert schmidt_rank(target_gate("CP", 2 * np.pi) @ psi) == 2


def test_universality_smoke():
    gens = {"Z": target_gate("Z_rot", np.pi / 2), "X": target_gate("X_rot", np.pi / 2)}
    word, dist = closest_word(gens, HADAMARD, max_len=6)
    assert dist < 0.05
    m = np.eye(2, dtype=complex)
    alphabet = {**gens, **{k + "^-1": v.conj().T for k, v in gens.items()}}
    for letter in word:
        m = alphabet[letter] @ m
    assert 1 - gate_fidelity(m, HADAMARD) == pytest.approx(dist, abs=1e-12)
