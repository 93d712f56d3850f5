import numpy as np
import pytest

from semiquantum.operators import HermitianOperator, InvalidArgumentError, PureState, partial_transpose, phi_plus, tensor
from semiquantum.popt import (
    PoptState,
    Verdict,
    classify,
    compose_with_ancilla,
    isotropic_state,
    make_wp,
    paired_max_entangled_effect,
    popt_violation_by_entangled_ancilla,
    product_min_seesaw,
    random_popt_bqs,
    tensor_with_pure_inputs,
)
from semiquantum.random import haar_state, random_density, substream

PSI_MINUS = np.array([0, 1, -1, 0]) / np.sqrt(2)
SINGLET = HermitianOperator(np.outer(PSI_MINUS, PSI_MINUS), (2, 2))
SWAP = np.eye(4)[[0, 2, 1, 3]]


def test_make_wp_endpoints():
    assert np.allclose(make_wp(0).op.matrix, np.eye(4) / 4)
    assert np.allclose(make_wp(1).op.matrix, SWAP / 2)


@pytest.mark.parametrize("p", [0.0, 0.1, 1 / 3, 0.6, 1.0])
def test_make_wp_spectrum(p):
    assert np.allclose(make_wp(p).op.eigvalsh(), np.sort([(1 - 3 * p) / 4] + [(1 + p) / 4] * 3), atol=1e-12)


def test_make_wp_range():
    with pytest.raises(InvalidArgumentError):
        make_wp(1.5)
    with pytest.raises(InvalidArgumentError):
        make_wp(-0.1)


def test_popt_state_trace():
    with pytest.raises(InvalidArgumentError):
        PoptState(HermitianOperator(np.eye(4), (2, 2)))


def test_isotropic_transpose_is_wp():
    for p in (0.2, 0.9):
        assert np.allclose(partial_transpose(isotropic_state(p), 1).matrix, make_wp(p).op.matrix)


def test_classify_examples():
    c = classify(make_wp(0.5))
    assert c.verdict is Verdict.BEYOND_QUANTUM_CANDIDATE
    assert c.min_eigenvalue == pytest.approx(-1 / 8)
    assert c.product_min >= -1e-9
    assert classify(random_density((2, 2), substream(1))).verdict is Verdict.QUANTUM
    bad = classify(HermitianOperator(np.diag([-0.5, 0.5, 0.5, 0.5]), (2, 2)))
    assert bad.verdict is Verdict.NOT_POPT
    assert bad.witness_vector.expectation(HermitianOperator(np.diag([-0.5, 0.5, 0.5, 0.5]), (2, 2))) == pytest.approx(
        bad.product_min, abs=1e-9
    )
    assert abs(abs(bad.witness_vector.amplitudes[0]) - 1) < 1e-6


def test_classify_threshold():
    assert classify(make_wp(1 / 3), restarts=2).verdict is Verdict.QUANTUM
    assert classify(make_wp(1 / 3 + 1e-6), restarts=2).verdict is Verdict.BEYOND_QUANTUM_CANDIDATE


def test_classify_requires_unit_trace():
    with pytest.raises(InvalidArgumentError):
        classify(HermitianOperator(np.eye(4), (2, 2)))


def test_classification_to_dict():
    doc = classify(HermitianOperator(np.diag([-0.5, 0.5, 0.5, 0.5]), (2, 2))).to_dict()
    assert doc["verdict"] == "NotPopt" and doc["witness_vector"]["dims"] == [2, 2]


def test_seesaw_wp_is_popt():
    assert product_min_seesaw(make_wp(0.9)).value >= -1e-9


def test_seesaw_singlet_zero():
    value, direction = product_min_seesaw(SINGLET)
    assert value == pytest.approx(0.0, abs=1e-9)
    assert direction.expectation(SINGLET) == value


def test_seesaw_value_matches_direction():
    rng = substream(2)
    w = HermitianOperator(random_density((2, 3, 2), rng).matrix - np.eye(12) / 24, (2, 3, 2))
    for groups in (None, [[0, 2], [1]], [[1], [0, 2]]):
        value, direction = product_min_seesaw(w, groups, restarts=4, seed=3)
        assert direction.dims == (2, 3, 2)
        assert direction.expectation(w) == pytest.approx(value, abs=1e-12)


def test_seesaw_deterministic():
    a = product_min_seesaw(make_wp(0.7), restarts=5, seed=9)
    b = product_min_seesaw(make_wp(0.7), restarts=5, seed=9)
    assert a.value == b.value and np.array_equal(a.direction.amplitudes, b.direction.amplitudes)


def test_seesaw_invalid_partition():
    with pytest.raises(InvalidArgumentError):
        product_min_seesaw(make_wp(0.5), [[0, 1]])
    with pytest.raises(InvalidArgumentError):
        product_min_seesaw(make_wp(0.5), [[0], [0]])


def test_seesaw_finds_entangled_refutation():
    composed = compose_with_ancilla(make_wp(0.5), SINGLET.transpose())
    value, _ = product_min_seesaw(composed, [[0, 1], [2, 3]])
    # the all-P+ evaluation gives (1 - 3/2)/16; the optimum is at least as low
    assert value <= -1 / 32 + 1e-9


def test_tensor_with_pure_inputs():
    zero = PureState(np.array([1, 0]), (2,))
    composed = tensor_with_pure_inputs(HermitianOperator(np.eye(4) / 4, (2, 2)), [zero, zero])
    assert composed.op.trace() == pytest.approx(1)
    assert composed.pairing == {0: (0, 2), 1: (1, 3)}
    expected = np.kron(np.kron(np.diag([1, 0]), np.diag([1, 0])), np.eye(4) / 4)
    assert np.allclose(composed.op.matrix, expected)


def test_pure_inputs_keep_popt():
    rng = substream(4)
    inputs = [haar_state((2,), rng), haar_state((2,), rng)]
    composed = tensor_with_pure_inputs(make_wp(0.9), inputs)
    assert product_min_seesaw(composed.op, [[0, 2], [1, 3]], restarts=8).value >= -1e-9
    assert product_min_seesaw(composed.op, restarts=8).value >= -1e-9


def test_paired_effect():
    eff = paired_max_entangled_effect((2, 2))
    assert np.allclose(eff.matrix, tensor(phi_plus(2).projector(), phi_plus(2).projector()).matrix)


def test_popt_violation_values():
    assert popt_violation_by_entangled_ancilla(make_wp(0.5), SINGLET) == pytest.approx(-1 / 32, abs=1e-12)
    assert popt_violation_by_entangled_ancilla(make_wp(1 / 3), SINGLET) == pytest.approx(0, abs=1e-12)
    rng = substream(5)
    rho, chi = random_density((2, 2), rng), random_density((2, 2), rng)
    assert popt_violation_by_entangled_ancilla(rho, chi) >= -1e-12


def test_popt_violation_brute_force():
    # 16x16 oracle in (A, A^o, B, B^o) order
    for p in (0.2, 0.5, 1.0):
        w = make_wp(p).op.matrix
        joint = np.kron(w, np.outer(PSI_MINUS, PSI_MINUS).T).reshape([2] * 8)
        joint = joint.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)
        pp = np.outer(phi_plus(2).amplitudes, phi_plus(2).amplitudes)
        oracle = np.trace(np.kron(pp, pp) @ joint).real
        assert popt_violation_by_entangled_ancilla(make_wp(p), SINGLET) == pytest.approx(oracle, abs=1e-12)
        assert oracle == pytest.approx((1 - 3 * p) / 16, abs=1e-12)


def test_popt_violation_dims():
    with pytest.raises(InvalidArgumentError):
        popt_violation_by_entangled_ancilla(make_wp(0.5), HermitianOperator(np.eye(2) / 2, (2,)))


def test_random_popt_bqs():
    for k in range(5):
        w = random_popt_bqs(substream(6, k))
        assert w.op.trace() == pytest.approx(1)
        assert w.op.min_eigenvalue() < 0
        assert product_min_seesaw(w, seed=k).value >= -1e-9
