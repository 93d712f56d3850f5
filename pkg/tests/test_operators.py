import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiquantum.operators import (
    HermitianOperator,
    DimensionMismatchError,
    InvalidArgumentError,
    Povm,
    PureState,
    born_probability,
    bloch_projector,
    degenerate_blocks,
    hermitian_eig,
    identity,
    partial_trace,
    partial_transpose,
    phi_plus,
    tensor,
    trace_all,
)
from semiquantum.popt import make_wp
from semiquantum.random import random_bloch, random_density, random_effect, random_hermitian, substream

PZ = HermitianOperator(np.diag([1.0, 0.0]), (2,))
PAULI_X = HermitianOperator(np.array([[0, 1], [1, 0]]), (2,))


def test_identity_tensor():
    assert np.allclose(tensor(identity([2]), identity([2])).matrix, np.eye(4))


def test_projector_tensor():
    assert np.allclose(tensor(PZ, PZ).matrix, np.diag([1, 0, 0, 0]))


def test_phi_plus_from_outer_products():
    e = np.eye(2)
    built = sum(np.kron(np.outer(e[i], e[j]), np.outer(e[i], e[j])) for i in range(2) for j in range(2)) / 2
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(built, np.outer(v, v))
    assert np.allclose(phi_plus(2).projector().matrix, built)


def test_tensor_dims_and_order():
    a = HermitianOperator(np.diag([1.0, 2.0]), (2,))
    b = HermitianOperator(np.diag([1.0, 3.0, 5.0]), (3,))
    ab = tensor(a, b)
    assert ab.dims == (2, 3)
    # left factor most significant
    assert np.allclose(np.diag(ab.matrix), [1, 3, 5, 2, 6, 10])


def test_non_hermitian_rejected():
    with pytest.raises(InvalidArgumentError):
        HermitianOperator(np.array([[0, 1], [0, 0]]), (2,))


def test_dims_mismatch_rejected():
    with pytest.raises(DimensionMismatchError):
        HermitianOperator(np.eye(4), (2, 3))


def test_marginal_of_phi_plus():
    assert np.allclose(partial_trace(phi_plus(2).projector(), [0]).matrix, np.eye(2) / 2)


def test_effective_input_via_partial_trace():
    psi = PureState(np.array([0.6, 0.8j]), (2,)).projector()
    joint = HermitianOperator(
        phi_plus(2).projector().matrix @ tensor(identity([2]), psi).matrix, (2, 2), check_hermitian=False
    )
    assert np.allclose(partial_trace(joint, [0]).matrix, psi.matrix.T / 2)


def test_partial_trace_empty_keep():
    with pytest.raises(InvalidArgumentError):
        partial_trace(identity([2, 2]), [])


def test_trace_all_unit():
    rng = substream(2)
    assert trace_all(random_density((2, 3), rng)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2, 2)])
def test_partial_trace_of_tensor(dims):
    rng = substream(3, len(dims))
    factors = [random_hermitian((d,), rng) for d in dims]
    joint = tensor(*factors)
    for k in range(len(dims)):
        others = np.prod([f.trace() for j, f in enumerate(factors) if j != k])
        assert np.allclose(partial_trace(joint, [k]).matrix, factors[k].matrix * others, atol=1e-10)


def test_partial_transpose_product():
    rng = substream(4)
    a, b = random_hermitian((2,), rng), random_hermitian((3,), rng)
    assert np.allclose(partial_transpose(tensor(a, b), 1).matrix, tensor(a, b.transpose()).matrix)


def test_partial_transpose_involution_and_trace():
    rng = substream(5)
    x = random_hermitian((2, 3), rng)
    y = partial_transpose(x, 0)
    assert np.allclose(partial_transpose(y, 0).matrix, x.matrix)
    assert y.trace() == pytest.approx(x.trace())


def test_partial_transpose_of_phi_plus_spectrum():
    vals = partial_transpose(phi_plus(2).projector(), 1).eigvalsh()
    assert np.allclose(vals, [-0.5, 0.5, 0.5, 0.5])


def test_partial_transpose_bad_index():
    with pytest.raises(InvalidArgumentError):
        partial_transpose(identity([2, 2]), 2)


def test_partial_transpose_keeps_product_psd():
    rng = substream(6)
    a, b = random_density((2,), rng), random_density((2,), rng)
    assert partial_transpose(tensor(a, b), 1).is_psd()


def test_hermitian_eig_examples():
    vals, _ = hermitian_eig(HermitianOperator(np.diag([0.9, 0.1]), (2,)))
    assert np.allclose(vals, [0.1, 0.9])
    vals, vecs = hermitian_eig(PAULI_X)
    assert np.allclose(vals, [-1, 1])
    minus = np.array([1, -1]) / np.sqrt(2)
    assert abs(abs(np.vdot(vecs[0].amplitudes, minus)) - 1) < 1e-12
    vals, _ = hermitian_eig(make_wp(1).op)
    assert np.allclose(vals, [-0.5, 0.5, 0.5, 0.5])


def test_hermitian_eig_rejects_non_hermitian():
    bad = HermitianOperator(np.array([[0, 1], [0, 0]]), (2,), check_hermitian=False)
    with pytest.raises(InvalidArgumentError):
        hermitian_eig(bad)


def test_hermitian_eig_reconstruction_500():
    rng = substream(7)
    worst = 0.0
    for k in range(500):
        d = int(rng.integers(1, 17))
        x = random_hermitian((d,), rng)
        vals, vecs = hermitian_eig(x)
        rebuilt = sum(v * np.outer(s.amplitudes, s.amplitudes.conj()) for v, s in zip(vals, vecs))
        worst = max(worst, np.linalg.norm(rebuilt - x.matrix))
    assert worst <= 1e-9


def test_degenerate_blocks():
    assert degenerate_blocks(np.array([-1.0, 0.5, 0.5 + 1e-12, 0.7])) == [[0], [1, 2], [3]]


def test_born_examples():
    assert born_probability(HermitianOperator(np.eye(4) / 4, (2, 2)), [identity([2]), identity([2])]) == pytest.approx(1)
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    singlet = HermitianOperator(np.outer(psi, psi), (2, 2))
    assert born_probability(singlet, [PZ, PZ]) == pytest.approx(0, abs=1e-15)


def test_born_wp_correlator():
    rng = substream(8)
    for p in (0.2, 0.7):
        for n, m in zip(random_bloch(rng, 50), random_bloch(rng, 50)):
            value = born_probability(make_wp(p).op, [bloch_projector(n), bloch_projector(m)])
            assert value == pytest.approx((1 + p * n @ m) / 4, abs=1e-10)


def test_born_party_assignment():
    rng = substream(9)
    rho = random_density((2, 3, 2), rng)
    e = random_effect((2,), rng)
    # effect on the last qubit only; compare with an explicit identity padding
    direct = np.trace(rho.matrix @ np.kron(np.eye(6), e.matrix)).real
    assert born_probability(rho, [e], parties=[2]) == pytest.approx(direct, abs=1e-12)
    f = random_effect((2, 3), rng)
    direct = np.trace(rho.matrix @ np.kron(f.matrix, np.eye(2))).real
    assert born_probability(rho, [f], parties=[[0, 1]]) == pytest.approx(direct, abs=1e-12)


def test_born_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        born_probability(identity([2, 2]), [identity([3]), identity([2])])


def test_born_linearity():
    rng = substream(10)
    r1, r2 = random_density((2, 2), rng), random_density((2, 2), rng)
    a, b = random_effect((2,), rng), random_effect((2,), rng)
    mix = r1 * 0.3 + r2 * 0.7
    assert born_probability(mix, [a, b]) == pytest.approx(
        0.3 * born_probability(r1, [a, b]) + 0.7 * born_probability(r2, [a, b]), abs=1e-12
    )
    c = random_effect((2,), rng)
    assert born_probability(r1, [a + c, b]) == pytest.approx(
        born_probability(r1, [a, b]) + born_probability(r1, [c, b]), abs=1e-12
    )


def test_pure_state_normalisation():
    with pytest.raises(InvalidArgumentError):
        PureState(np.array([1.0, 1.0]), (2,))


def test_povm_invariants():
    with pytest.raises(InvalidArgumentError):
        Povm((PZ,))
    with pytest.raises(InvalidArgumentError):
        Povm((PAULI_X, identity([2]) - PAULI_X))
    povm = Povm.two_outcome(PZ)
    assert povm.is_projective() and len(povm) == 2


small_dims = st.lists(st.integers(1, 3), min_size=1, max_size=3)


@settings(max_examples=40, deadline=None)
@given(small_dims, small_dims, st.integers(0, 2**31 - 1))
def test_tensor_trace_multiplicative(da, db, seed):
    rng = np.random.default_rng(seed)
    a, b = random_hermitian(da, rng), random_hermitian(db, rng)
    assert tensor(a, b).trace() == pytest.approx(a.trace() * b.trace(), abs=1e-12 * (1 + abs(a.trace() * b.trace())))


@settings(max_examples=30, deadline=None)
@given(small_dims, small_dims, small_dims, st.integers(0, 2**31 - 1))
def test_tensor_associative(da, db, dc, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_hermitian(d, rng) for d in (da, db, dc))
    left, right = tensor(tensor(a, b), c), tensor(a, tensor(b, c))
    assert left.dims == right.dims
    assert np.allclose(left.matrix, right.matrix)


@settings(max_examples=30, deadline=None)
@given(small_dims, st.integers(0, 2**31 - 1))
def test_partial_transpose_hermitian_and_trace(dims, seed):
    rng = np.random.default_rng(seed)
    x = random_hermitian(dims, rng)
    for k in range(len(dims)):
        y = partial_transpose(x, k)
        assert y.trace() == pytest.approx(x.trace(), abs=1e-10)
        assert np.linalg.norm(y.matrix - y.matrix.conj().T) < 1e-12
