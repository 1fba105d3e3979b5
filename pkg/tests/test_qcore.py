import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weakpathsim import qcore
from weakpathsim.errors import CapacityError, ContractError, ShapeError
from weakpathsim.qcore import (DensityOperator, Povm, StateVector,
                               UnitaryOperator, apply_unitary, born,
                               partial_trace, tensor_product)

from conftest import random_density, random_state, random_unitary


def brute_force_partial_trace(rho, dims, keep):
    """Independent nested-index summation oracle."""
    d_keep = dims[keep]
    out = np.zeros((d_keep, d_keep), dtype=complex)
    tensor = rho.reshape(list(dims) + list(dims))
    n = len(dims)
    for idx in np.ndindex(*dims):
        for jdx in np.ndindex(*dims):
            if all(idx[f] == jdx[f] for f in range(n) if f != keep):
                out[idx[keep], jdx[keep]] += tensor[idx + jdx]
    return out


class TestTypes:
    def test_state_vector_weight_and_flag(self):
        vec = StateVector([0.6, 0.8j])
        assert vec.normalized
        heavy = StateVector([1.0, 1.0])
        assert not heavy.normalized
        assert heavy.weight == pytest.approx(2.0)

    def test_state_vector_rejects_nan(self):
        with pytest.raises(ContractError):
            StateVector([np.nan, 0.0])

    def test_density_operator_requires_hermitian_psd(self):
        with pytest.raises(ContractError):
            DensityOperator([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ContractError):
            DensityOperator([[1.0, 0.0], [0.0, -0.5]])

    def test_unitary_validation(self):
        UnitaryOperator(np.eye(3))
        with pytest.raises(ContractError):
            UnitaryOperator(np.eye(3) * 1.001)

    def test_povm_validation(self, rng):
        u = random_unitary(rng, 3)
        elements = [np.outer(u[:, k], u[:, k].conj()) for k in range(3)]
        povm = Povm(labels=("a", "b", "c"), elements=tuple(elements))
        assert povm.dim == 3
        with pytest.raises(ContractError):
            Povm(labels=("a", "b"), elements=(elements[0], elements[1]))
        with pytest.raises(ContractError):
            Povm(labels=("a", "a"), elements=(elements[0], elements[1]))


class TestTensorProduct:
    def test_basis_product(self):
        out = tensor_product(StateVector([1, 0]), StateVector([1, 0]))
        assert np.allclose(out.amps, [1, 0, 0, 0])

    def test_entangled_pair_amplitudes(self):
        # sqrt(1-eps) vv + sqrt(eps) hh at eps = 0.04
        eps = 0.04
        vv = tensor_product(StateVector([1, 0]), StateVector([1, 0]))
        hh = tensor_product(StateVector([0, 1]), StateVector([0, 1]))
        joint = np.sqrt(1 - eps) * vv.amps + np.sqrt(eps) * hh.amps
        assert np.allclose(joint, [np.sqrt(0.96), 0.0, 0.0, 0.2], atol=1e-15)

    def test_norm_multiplies(self, rng):
        a = StateVector(random_state(rng, 3))
        b = StateVector(random_state(rng, 4))
        assert tensor_product(a, b).weight == pytest.approx(1.0, abs=1e-12)

    def test_capacity_cap(self):
        big = StateVector(np.ones(100) / 10.0)
        with pytest.raises(CapacityError):
            tensor_product(big, StateVector(np.ones(100) / 10.0))


class TestPartialTrace:
    def test_product_state_factorizes(self, rng):
        rho_a = random_density(rng, 2)
        rho_b = random_density(rng, 3)
        joint = DensityOperator(np.kron(rho_a, rho_b))
        reduced = partial_trace(joint, [2, 3], keep=0)
        assert np.allclose(reduced.matrix, rho_a, atol=1e-12)

    def test_trace_preserved(self, rng):
        rho = DensityOperator(random_density(rng, 6))
        for keep in (0, 1):
            assert partial_trace(rho, [2, 3], keep).trace == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("dims,keep", [((2, 2, 2), 0), ((2, 2, 2), 1),
                                           ((2, 2, 2), 2), ((3, 3), 0), ((3, 3), 1)])
    def test_matches_nested_summation_oracle(self, rng, dims, keep):
        rho = random_density(rng, int(np.prod(dims)))
        expected = brute_force_partial_trace(rho, dims, keep)
        got = partial_trace(DensityOperator(rho), dims, keep)
        assert np.max(np.abs(got.matrix - expected)) <= 1e-12

    def test_dims_mismatch(self, rng):
        rho = DensityOperator(random_density(rng, 6))
        with pytest.raises(ShapeError):
            partial_trace(rho, [2, 2], keep=0)


class TestBorn:
    def test_identity_povm(self, rng):
        povm = Povm(labels=("only",), elements=(np.eye(4),))
        state = StateVector(random_state(rng, 4))
        assert born(state, povm) == {"only": pytest.approx(1.0, abs=1e-12)}

    def test_matches_elementwise_trace(self, rng):
        u = random_unitary(rng, 3)
        povm = Povm(labels=("x", "y", "z"),
                    elements=tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(3)))
        rho = random_density(rng, 3)
        probs = born(DensityOperator(rho), povm)
        for k, label in enumerate(("x", "y", "z")):
            direct = np.trace(povm.element(label) @ rho).real
            assert probs[label] == pytest.approx(direct, abs=1e-14)

    def test_sum_equals_state_weight(self, rng):
        u = random_unitary(rng, 4)
        povm = Povm(labels=tuple("abcd"),
                    elements=tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(4)))
        heavy = StateVector(2.0 * random_state(rng, 4))
        assert sum(born(heavy, povm).values()) == pytest.approx(heavy.weight, abs=1e-12)


class TestApplyUnitary:
    def test_identity_is_noop(self, rng):
        state = StateVector(random_state(rng, 3))
        out = apply_unitary(UnitaryOperator(np.eye(3)), state)
        assert np.allclose(out.amps, state.amps)

    def test_norm_preserved(self, rng):
        u = UnitaryOperator(random_unitary(rng, 5))
        state = StateVector(random_state(rng, 5))
        assert apply_unitary(u, state).weight == pytest.approx(1.0, abs=1e-12)
        rho = DensityOperator(random_density(rng, 5))
        assert apply_unitary(u, rho).trace == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ShapeError):
            apply_unitary(UnitaryOperator(np.eye(2)), StateVector(random_state(rng, 3)))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim_a=st.integers(2, 4), dim_b=st.integers(2, 4))
def test_tensor_norm_property(seed, dim_a, dim_b):
    rng = np.random.default_rng(seed)
    a = StateVector(random_state(rng, dim_a))
    b = StateVector(random_state(rng, dim_b))
    assert abs(tensor_product(a, b).weight - 1.0) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_partial_trace_property(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 6)
    expected = brute_force_partial_trace(rho, (2, 3), 1)
    got = partial_trace(DensityOperator(rho), (2, 3), 1)
    assert np.max(np.abs(got.matrix - expected)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_born_sums_to_trace_property(seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, 3)
    povm = Povm(labels=("x", "y", "z"),
                elements=tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(3)))
    rho = DensityOperator(random_density(rng, 3))
    assert sum(born(rho, povm).values()) == pytest.approx(rho.trace, abs=1e-12)


def test_min_eigenvalue_uses_hermitian_part():
    noisy = np.array([[1.0, 1e-14j], [-1e-14j, 0.5]])
    assert qcore.min_eigenvalue(noisy) >= 0.0
