import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weakpathsim import interferometer as itf
from weakpathsim.errors import ContractError, DomainError, SingularPostselectionError
from weakpathsim.interferometer import (CheckpointMarkers, NetworkConfig,
                                        backward_state, conditional_marker_state,
                                        detection_probability, forward_state,
                                        loop_probability, marked_transfer,
                                        net_loop_amplitude,
                                        operator_split_factorizations,
                                        split_factorizations, standard_unitaries,
                                        verify_splits, weak_values)
from weakpathsim.qcore import DensityOperator, partial_trace

from conftest import EPS_GRID, random_unitary

RT3 = np.sqrt(3.0)
RT2 = np.sqrt(2.0)


def joint_network_operator(markers, config=itf.STANDARD_CONFIG):
    """Independent 96-dim (path x five-qubit-marker) network operator.

    Builds the full joint unitary by explicit Kronecker products, without the
    operator-matrix machinery under test.
    """
    eye = np.eye(32, dtype=complex)
    ops = markers.operators()

    def diag_block(per_path):
        out = np.zeros((96, 96), dtype=complex)
        for p, op in enumerate(per_path):
            out[32 * p:32 * (p + 1), 32 * p:32 * (p + 1)] = op
        return out

    blocks = [0.0 if p in config.blocked_paths else 1.0 for p in itf.PATHS]
    phases = np.exp(1j * np.asarray(config.link_phases))
    chain = [
        np.kron(config.splitter_matrix(1), eye),
        diag_block([eye, markers.embedded("E"), eye]),
        np.kron(config.splitter_matrix(2), eye),
        diag_block([blocks[0] * phases[0] * markers.embedded("A"),
                    blocks[1] * phases[1] * markers.embedded("B"),
                    blocks[2] * phases[2] * markers.embedded("C")]),
        np.kron(config.splitter_matrix(3), eye),
        diag_block([eye, markers.embedded("F"), eye]),
        np.kron(config.splitter_matrix(4), eye),
    ]
    total = np.eye(96, dtype=complex)
    for factor in chain:
        total = factor @ total
    return total


def brute_force_t_fin(markers, config=itf.STANDARD_CONFIG):
    total = joint_network_operator(markers, config)
    return total[64:96, 64:96]  # <path iii| ... |path iii> block


class TestStandardUnitaries:
    def test_inner_leaves_third_path_alone(self):
        us = standard_unitaries()
        assert np.allclose(us["U2"] @ [0, 0, 1], [0, 0, 1])

    def test_full_product_closed_form(self):
        us = standard_unitaries()
        full = us["U4"] @ us["U3"] @ us["U2"] @ us["U1"]
        expected = np.array([[0, -RT3, np.sqrt(6)], [RT3, 2, RT2],
                             [-np.sqrt(6), RT2, 1]]) / 3.0
        assert np.max(np.abs(full - expected)) <= 1e-12
        assert full[2, 2] == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_pairwise_equality(self):
        us = standard_unitaries()
        assert np.array_equal(us["U1"], us["U4"])
        assert np.array_equal(us["U2"], us["U3"])


class TestForwardBackward:
    def test_forward_stages(self):
        assert np.allclose(forward_state(stage=0).amps, [0, 0, 1])
        assert np.allclose(forward_state(stage=2).amps, np.ones(3) / RT3)
        assert np.allclose(forward_state(stage=3).amps, [RT2, 0, 1] / RT3)
        fwd = forward_state(stage=4)
        assert fwd.amps[2] == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert abs(fwd.amps[2]) ** 2 == pytest.approx(1.0 / 9.0, abs=1e-15)

    def test_equal_checkpoint_probabilities(self):
        probs = np.abs(forward_state(stage=2).amps) ** 2
        assert np.allclose(probs, 1.0 / 3.0, atol=1e-14)

    def test_backward_stages(self):
        assert np.allclose(backward_state(stage=0).amps,
                           np.array([-np.sqrt(6), RT2, 1]) / 3.0)
        assert np.allclose(backward_state(stage=2).amps, [-1, 1, 1] / RT3)
        assert np.allclose(backward_state(stage=4).amps, [0, 0, 1])

    def test_no_probability_at_loop_exit(self):
        # path ii carries nothing between the third and fourth splitters
        assert abs(forward_state(stage=3).amps[1]) <= 1e-15

    def test_stage_range(self):
        with pytest.raises(DomainError):
            forward_state(stage=5)


class TestWeakValues:
    @pytest.mark.parametrize("split,expected", [
        (0, (0, 0, 1)), (1, (0, 0, 1)), (2, (-1, 1, 1)), (3, (0, 0, 1)), (4, (0, 0, 1)),
    ])
    def test_table(self, split, expected):
        got = weak_values(split).as_tuple()
        assert np.max(np.abs(np.array(got) - np.array(expected))) <= 1e-12

    def test_unit_sum_all_splits(self):
        for split in range(5):
            assert sum(weak_values(split).as_tuple()) == pytest.approx(1.0, abs=1e-12)

    def test_unit_sum_with_phases(self):
        config = NetworkConfig(link_phases=(0.3, -0.7, 0.1))
        for split in range(5):
            assert sum(weak_values(split, config).as_tuple()) == pytest.approx(1.0, abs=1e-12)

    def test_singular_postselection(self):
        # blocking every path kills the detector amplitude
        config = NetworkConfig(blocked_paths=frozenset({"i", "ii", "iii"}))
        with pytest.raises(SingularPostselectionError):
            weak_values(2, config)


class TestMarkedTransfer:
    def test_unmarked_limits(self):
        transfer = marked_transfer(CheckpointMarkers.identity())
        assert np.max(np.abs(transfer.t_fin - np.eye(32) / 3.0)) <= 1e-12
        assert np.max(np.abs(transfer.t_f)) <= 1e-12

    def test_operator_entries_closed_form(self):
        markers = CheckpointMarkers(
            a=random_unitary(np.random.default_rng(1), 2),
            b=random_unitary(np.random.default_rng(2), 2),
            c=random_unitary(np.random.default_rng(3), 2),
            e=random_unitary(np.random.default_rng(4), 2),
            f=random_unitary(np.random.default_rng(5), 2))
        a, b, c = markers.embedded("A"), markers.embedded("B"), markers.embedded("C")
        e, f = markers.embedded("E"), markers.embedded("F")
        loop = f @ (b - a) @ e
        expected = {
            (0, 0): -3.0 * (b - a), (0, 1): -RT3 * (b + a) @ e, (0, 2): np.sqrt(6) * (b + a) @ e,
            (1, 0): RT3 * f @ (b + a), (1, 1): 4.0 * c + loop, (1, 2): RT2 * (2.0 * c - loop),
            (2, 0): -np.sqrt(6) * f @ (b + a), (2, 1): RT2 * (2.0 * c - loop),
            (2, 2): 2.0 * (c + loop),
        }
        transfer = marked_transfer(markers)
        for (row, col), mat in expected.items():
            assert np.max(np.abs(transfer.matrix.entry(row, col) - mat / 6.0)) <= 1e-12
        assert np.max(np.abs(transfer.t_fin - (c + loop) / 3.0)) <= 1e-12
        assert np.max(np.abs(transfer.t_f - (b - a) @ e / np.sqrt(6.0))) <= 1e-12

    def test_eight_factorizations_agree(self, rng):
        markers = CheckpointMarkers(
            a=random_unitary(rng, 2), b=random_unitary(rng, 2), c=random_unitary(rng, 2),
            e=random_unitary(rng, 2), f=random_unitary(rng, 2))
        products = operator_split_factorizations(markers)
        assert len(products) == 8
        reference = marked_transfer(markers).t_fin
        for product in products:
            assert np.max(np.abs(product - reference)) <= 1e-12

    def test_against_independent_joint_evolution(self, rng):
        markers = CheckpointMarkers(
            a=random_unitary(rng, 2), b=random_unitary(rng, 2), c=random_unitary(rng, 2),
            e=random_unitary(rng, 2), f=random_unitary(rng, 2))
        assert np.max(np.abs(marked_transfer(markers).t_fin
                             - brute_force_t_fin(markers))) <= 1e-12


class TestDetectionProbability:
    def test_unmarked(self):
        assert detection_probability(CheckpointMarkers.identity()) == pytest.approx(
            1.0 / 9.0, abs=1e-12)

    @pytest.mark.parametrize("eps", [0.0, 0.01, 0.04, 0.1, 1.0 / 3.0])
    def test_symmetric_closed_form_and_brute_force(self, eps):
        markers = CheckpointMarkers.symmetric(eps)
        p = detection_probability(markers)
        assert p == pytest.approx((1.0 + 6.0 * eps) / 9.0, abs=1e-12)
        t_fin = brute_force_t_fin(markers)
        rho = markers.initial_joint()
        brute = np.trace(t_fin @ rho @ t_fin.conj().T).real
        assert p == pytest.approx(brute, abs=1e-12)

    def test_symmetric_value_at_004(self):
        p = detection_probability(CheckpointMarkers.symmetric(0.04))
        assert p == pytest.approx(1.24 / 9.0, abs=1e-12)

    def test_reflection_transmission_decomposition(self):
        # bypass reflection (1/3)(1/3) plus loop transmission (2/3) eps
        for eps in EPS_GRID:
            markers = CheckpointMarkers.symmetric(eps)
            bypass = 1.0 / 9.0
            loop = (2.0 / 3.0) * loop_probability(markers)
            assert detection_probability(markers) == pytest.approx(
                bypass + loop, abs=1e-12)

    def test_blocked_bypass_gives_loop_signal(self):
        for eps in EPS_GRID:
            markers = CheckpointMarkers.symmetric(eps)
            config = NetworkConfig(blocked_paths=frozenset({"iii"}))
            assert detection_probability(markers, config) == pytest.approx(
                (2.0 / 3.0) * eps, abs=1e-12)

    def test_loop_probability_equals_epsilon(self):
        for eps in EPS_GRID:
            markers = CheckpointMarkers.symmetric(eps)
            assert loop_probability(markers) == pytest.approx(eps, abs=1e-12)


class TestConditionalMarkerStates:
    def brute_force_reduced(self, markers, checkpoint):
        total = joint_network_operator(markers)
        rho0 = markers.initial_joint()
        t_fin = total[64:96, 64:96]
        rho_fin = t_fin @ rho0 @ t_fin.conj().T
        rho_fin /= np.trace(rho_fin).real
        keep = itf.CHECKPOINTS.index(checkpoint)
        return partial_trace(DensityOperator(rho_fin), [2] * 5, keep).matrix

    @pytest.mark.parametrize("eps", [0.01, 0.04, 0.1, 1.0 / 3.0])
    def test_closed_forms_match_brute_force(self, eps):
        rot = itf.marking_rotation(eps)
        markers = CheckpointMarkers(a=rot, b=rot, c=rot, e=rot, f=rot)
        for checkpoint in ("E", "C", "F"):
            closed = conditional_marker_state(markers, checkpoint).matrix
            brute = self.brute_force_reduced(markers, checkpoint)
            assert np.max(np.abs(closed - brute)) <= 1e-12

    def test_weak_limit(self):
        rot = itf.marking_rotation(1e-9)
        markers = CheckpointMarkers(a=rot, b=rot, c=rot, e=rot, f=rot)
        rho_c = conditional_marker_state(markers, "C").matrix
        turned = rot @ markers.initial[2] @ rot.conj().T
        assert np.max(np.abs(rho_c - turned)) <= 1e-8
        rho_e = conditional_marker_state(markers, "E").matrix
        assert np.max(np.abs(rho_e - markers.initial[3])) <= 1e-8

    def test_strong_limit_value(self):
        eps = 1.0 / 3.0
        rot = itf.marking_rotation(eps)
        markers = CheckpointMarkers(a=rot, b=rot, c=rot, e=rot, f=rot)
        rho_e = conditional_marker_state(markers, "E").matrix
        turned = rot @ markers.initial[3] @ rot.conj().T
        expected = (markers.initial[3] + 2.0 * turned) / 3.0
        assert np.max(np.abs(rho_e - expected)) <= 1e-12

    def test_trivial_markers(self):
        markers = CheckpointMarkers.identity()
        for checkpoint in ("E", "C", "F"):
            state = conditional_marker_state(markers, checkpoint).matrix
            assert np.max(np.abs(state - markers.initial[0])) <= 1e-12

    def test_unbalanced_markers_rejected(self, rng):
        markers = CheckpointMarkers(a=random_unitary(rng, 2))
        with pytest.raises(ContractError):
            conditional_marker_state(markers, "E")


class TestPhaseOnlyMarkers:
    def test_net_loop_amplitude_identity(self):
        for alpha, beta, phi in [(0.3, -0.2, 0.5), (1.2, 1.2, 0.0), (0.0, np.pi, 2.0)]:
            net = net_loop_amplitude(alpha, beta, phi)
            expected = (2j * np.exp(1j * (phi + 0.5 * (alpha + beta)))
                        * np.sin(0.5 * (alpha - beta)))
            assert abs(net - expected) <= 1e-12

    def test_balanced_loop_leaves_no_trace(self):
        kick = itf.marking_rotation(0.2)
        markers = CheckpointMarkers.phase_only(0.4, 0.4, 0.1, 0.9, e=kick)
        # equal phases: destructive interference protects the loop marker
        assert markers.epsilon() == pytest.approx(0.0, abs=1e-12)
        rho_e = conditional_marker_state(markers, "E").matrix
        assert np.max(np.abs(rho_e - markers.initial[3])) <= 1e-12

    def test_unbalanced_loop_marks(self):
        kick = itf.marking_rotation(0.2)
        alpha, beta = 0.6, -0.6
        markers = CheckpointMarkers.phase_only(alpha, beta, 0.0, 0.0, e=kick)
        eps = markers.epsilon()
        assert eps == pytest.approx((2.0 / 3.0) * np.sin(0.5 * (alpha - beta)) ** 2,
                                    abs=1e-12)
        net = net_loop_amplitude(alpha, beta, 0.0)
        assert abs(net) ** 2 == pytest.approx(6.0 * eps, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_epsilon_identity_random_markers(seed):
    """Loop strength from the difference operator equals the overlap form."""
    rng = np.random.default_rng(seed)
    markers = CheckpointMarkers(a=random_unitary(rng, 2), b=random_unitary(rng, 2))
    a, b = markers.embedded("A"), markers.embedded("B")
    rho = markers.initial_joint()
    diff = (b - a)
    direct = np.trace(diff.conj().T @ diff @ rho).real / 6.0
    overlap = (1.0 / 3.0) - np.real(
        np.conj(markers.expectation("A")) * markers.expectation("B")) / 3.0
    assert abs(direct - overlap) <= 1e-12
    assert abs(markers.epsilon() - direct) <= 1e-12


def test_verify_splits_all_small():
    report = verify_splits(markers=CheckpointMarkers.symmetric(0.04))
    assert set(report) >= {"matrix-product-cut-1", "inner-products-agree",
                           "full-product-closed-form", "inner-products-value",
                           "operator-products-agree"}
    assert all(dev <= 1e-12 for dev in report.values())


def test_split_factorizations_all_one_third():
    for amplitude in split_factorizations():
        assert amplitude == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_replacement_matrices_are_permutations():
    config = NetworkConfig(beam_splitters=frozenset({"BS1", "BS2"}))
    m3, m4 = config.splitter_matrix(3), config.splitter_matrix(4)
    assert np.array_equal(m3, itf.REMOVED_BS3)
    assert np.array_equal(m4, itf.REMOVED_BS4)
    fwd = forward_state(config, 4)
    assert np.allclose(np.abs(fwd.amps) ** 2, 1.0 / 3.0, atol=1e-12)
