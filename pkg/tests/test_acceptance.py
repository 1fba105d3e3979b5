"""Acceptance suite: one test per top-level criterion, each printing a
pass/fail line (run with ``pytest -s tests/test_acceptance.py`` to see them).
All tolerances are pinned here; nothing is deferred to calibration."""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from weakpathsim import optics
from weakpathsim.discrimination import (exit_povm, min_error_success, ud2, ud3,
                                        ud3_on_postselected)
from weakpathsim.interferometer import (CheckpointMarkers, detection_probability,
                                        forward_state, marked_transfer,
                                        operator_split_factorizations,
                                        verify_splits, weak_values)
from weakpathsim.marker import build_family, joint_state, pointer_product_family, rho_fin
from weakpathsim.qcore import DensityOperator, born, projector
from weakpathsim.scenario import Scenario
from weakpathsim.simulate import betting_game, compare_to_analytic, run_trials
from weakpathsim.twopath import (TwoPathModel, detection_and_states, fringe_scan,
                                 whole_ensemble_tally)

from conftest import random_unitary
from test_discrimination import sdp_min_error_success

TOL = 1e-12
FAMILY_GRID = (0.01, 0.04, 0.1, 1.0 / 3.0)
TWO_PATH_GRID = (0.0, 0.04, 0.1, 0.25, 0.5)


@contextmanager
def criterion(number, description):
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {number}: {description}")
        raise
    print(f"[PASS] criterion {number}: {description}")


def test_criterion_1_unmarked_detection():
    with criterion(1, "unmarked network: amplitude 1/3, detection probability 1/9"):
        amplitude = forward_state(stage=4).amps[2]
        assert abs(amplitude - 1.0 / 3.0) <= TOL
        assert abs(abs(amplitude) ** 2 - 1.0 / 9.0) <= TOL
        assert abs(detection_probability(CheckpointMarkers.identity()) - 1.0 / 9.0) <= TOL


def test_criterion_2_weak_value_table():
    with criterion(2, "weak values of the path projectors at all five splits"):
        expected = {0: (0, 0, 1), 1: (0, 0, 1), 2: (-1, 1, 1),
                    3: (0, 0, 1), 4: (0, 0, 1)}
        for split, values in expected.items():
            got = weak_values(split).as_tuple()
            assert max(abs(g - v) for g, v in zip(got, values)) <= TOL
            assert abs(sum(got) - 1.0) <= TOL


def test_criterion_3_factorization_suite():
    with criterion(3, "matrix splits, five inner products, eight operator products"):
        report = verify_splits(markers=CheckpointMarkers.symmetric(0.04))
        assert all(dev <= TOL for dev in report.values()), report
        # the operator identity holds for arbitrary markers, not just the
        # calibrated family
        rng = np.random.default_rng(99)
        markers = CheckpointMarkers(
            a=random_unitary(rng, 2), b=random_unitary(rng, 2),
            c=random_unitary(rng, 2), e=random_unitary(rng, 2),
            f=random_unitary(rng, 2))
        reference = marked_transfer(markers).t_fin
        for product in operator_split_factorizations(markers):
            assert np.max(np.abs(product - reference)) <= TOL


def test_criterion_4_marker_family():
    with criterion(4, "marker family Gram data and calibration across the grid"):
        for eps in FAMILY_GRID:
            family = build_family(eps)
            gram = family.gram()
            expected = np.full((3, 3), 1.0 - 3.0 * eps) + 3.0 * eps * np.eye(3)
            assert np.max(np.abs(gram - expected)) <= TOL
            markers = CheckpointMarkers.symmetric(eps)
            for checkpoint in ("A", "B"):
                assert abs(markers.expectation(checkpoint)
                           - np.sqrt(1.0 - 3.0 * eps)) <= TOL
            pointers = pointer_product_family(eps)
            for k in ("A", "B"):
                assert abs(np.vdot(pointers["psi"], pointers[k])
                           - np.sqrt(1.0 - 3.0 * eps)) <= TOL
            diff = family.psi_b - family.psi_a
            assert abs(np.vdot(diff, diff).real - 6.0 * eps) <= TOL
            assert abs(np.vdot(diff, family.psi_c)) <= TOL


def test_criterion_5_ud_statistics_on_detected():
    with criterion(5, "unambiguous-discrimination statistics conditioned on detection"):
        for eps in (0.01, 0.04, 0.1, 1.0 / 3.0):
            probs = ud3_on_postselected(eps)
            for a in "ABC":
                assert abs(probs[a] - 3.0 * eps / (1.0 + 6.0 * eps)) <= TOL
            assert abs(probs["0"] - (1.0 - 3.0 * eps) / (1.0 + 6.0 * eps)) <= TOL
            # accounting identity: reflected bypass + transmitted loop
            assert abs((1.0 / 9.0) + (2.0 / 3.0) * eps
                       - (1.0 + 6.0 * eps) / 9.0) <= TOL
            assert abs(detection_probability(CheckpointMarkers.symmetric(eps))
                       - (1.0 + 6.0 * eps) / 9.0) <= TOL


def test_criterion_6_exit_orthogonal_measurement():
    with criterion(6, "orthogonal exit measurement: zero pattern and frequencies"):
        for eps in (0.01, 0.04, 0.1, 1.0 / 3.0):
            family = build_family(eps)
            povm = exit_povm(eps).povm
            loop = (family.psi_b - family.psi_a) / np.sqrt(6.0 * eps)
            on_bypass = born(DensityOperator(projector(family.psi_c)), povm)
            on_loop = born(DensityOperator(projector(loop)), povm)
            assert on_bypass["i"] <= TOL and on_loop["i"] <= TOL
            assert abs(on_bypass["ii"] - 1.0) <= TOL and on_loop["ii"] <= TOL
            assert on_bypass["iii"] <= TOL and abs(on_loop["iii"] - 1.0) <= TOL
            detected = born(rho_fin(family), povm)
            assert detected["i"] <= TOL
            assert abs(detected["ii"] - 1.0 / (1.0 + 6.0 * eps)) <= TOL
            assert abs(detected["iii"] - 6.0 * eps / (1.0 + 6.0 * eps)) <= TOL
            bypass_rate, loop_rate = 1.0 / 9.0, (2.0 / 3.0) * eps
            assert abs(detected["ii"]
                       - bypass_rate / (bypass_rate + loop_rate)) <= TOL
            assert abs(detected["iii"]
                       - loop_rate / (bypass_rate + loop_rate)) <= TOL


def test_criterion_7_two_path_model():
    with criterion(7, "two-path conditional statistics, tally, fringe visibility"):
        for eps in (0.01, 0.04, 0.1, 0.25, 0.5):
            result = detection_and_states(TwoPathModel(eps))
            povm = ud2(eps).povm
            dark = born(result.rho_fin, povm)
            assert dark["0"] <= TOL
            assert abs(dark["A"] - 0.5) <= TOL and abs(dark["B"] - 0.5) <= TOL
            bright = born(result.rho_fin_prime, povm)
            assert abs(bright["A"] - 0.5 * eps / (1.0 - eps)) <= TOL
            assert abs(bright["0"] - (1.0 - 2.0 * eps) / (1.0 - eps)) <= TOL
            tally = whole_ensemble_tally(eps)
            assert abs(tally["knownA"] - eps) <= TOL
            assert abs(tally["knownB"] - eps) <= TOL
            assert abs(tally["unknowable"] - (1.0 - 2.0 * eps)) <= TOL
        for eps in TWO_PATH_GRID:
            assert abs(fringe_scan(eps).visibility - (1.0 - 2.0 * eps)) <= 1e-9


def test_criterion_8_optical_equivalences():
    with criterion(8, "compiled optical setups match the abstract measurements"):
        for eps in (0.01, 0.04, 0.1):
            compiled2 = optics.compile_setup(optics.polarization_ud_setup(eps))
            assert optics.equivalence(compiled2, ud2(eps).povm) <= TOL
            model = TwoPathModel(eps)
            on_a = born(DensityOperator(projector(model.psi_a)), compiled2)
            assert abs(on_a["A"] - 2.0 * eps) <= TOL and on_a["B"] <= TOL
            assert abs(on_a["0"] - (1.0 - 2.0 * eps)) <= TOL

            compiled3 = optics.compile_setup(optics.path_qutrit_ud_setup(eps))
            assert optics.equivalence(compiled3, ud3(eps).povm) <= TOL
            family = build_family(eps)
            for label, state in (("A", family.psi_a), ("B", family.psi_b),
                                 ("C", family.psi_c)):
                probs = born(DensityOperator(projector(state)), compiled3)
                assert abs(probs[label] - 3.0 * eps) <= TOL

            sorter = optics.compile_setup(optics.path_qutrit_exit_setup(eps))
            assert optics.equivalence(sorter, exit_povm(eps).povm) <= TOL
            detected = born(rho_fin(family), sorter)
            assert detected["i"] <= TOL
            assert abs(detected["ii"] - 1.0 / (1.0 + 6.0 * eps)) <= TOL

            mem = optics.compile_setup(optics.polarization_mem_setup())
            success = 0.5 * (born(DensityOperator(projector(model.psi_a)), mem)["A"]
                             + born(DensityOperator(projector(model.psi_b)), mem)["B"])
            assert abs(success - (0.5 + np.sqrt(eps * (1.0 - eps)))) <= TOL

            source = optics.pair_source("three-path-entangled", eps)
            pushed = optics.prepared_joint_state(source)
            reference = joint_state(family, "checkpoints").amps
            assert np.max(np.abs(pushed - reference)) <= TOL


def test_criterion_9_monte_carlo():
    with criterion(9, "Monte Carlo frequencies, zero-error betting, determinism"):
        n = 1_000_000
        eps = 0.04

        def within_budget(start):
            assert time.monotonic() - start <= 10.0

        start = time.monotonic()
        verify = Scenario(topology="three-path", epsilon=eps,
                          beam_splitters=frozenset({"BS1", "BS2"}),
                          mode="montecarlo", trials=n, seed=1)
        stats = run_trials(verify)
        for counts, analytic in ((stats.alice_counts(), stats.model.alice_marginal()),
                                 (stats.bob_counts(), stats.model.bob_marginal())):
            assert all(c.passed for c in
                       compare_to_analytic(counts, n, analytic).values())
        within_budget(start)

        start = time.monotonic()
        conditioned = Scenario(topology="three-path", epsilon=eps,
                               condition="detectorD", mode="betting",
                               trials=n, seed=2)
        report = betting_game(conditioned)
        assert report.n_wins == report.n_bets  # count-exact zero error
        expected = 9.0 * eps / (1.0 + 6.0 * eps)
        sigma = np.sqrt(expected * (1.0 - expected) / n)
        assert abs(report.bet_rate - expected) <= 5.0 * sigma
        within_budget(start)

        start = time.monotonic()
        two_path = Scenario(topology="two-path", epsilon=eps,
                            beam_splitters=frozenset({"BS2"}),
                            mode="betting", trials=n, seed=3)
        report2 = betting_game(two_path)
        assert report2.n_wins == report2.n_bets
        expected2 = 2.0 * eps
        sigma2 = np.sqrt(expected2 * (1.0 - expected2) / n)
        assert abs(report2.bet_rate - expected2) <= 5.0 * sigma2
        within_budget(start)

        start = time.monotonic()
        sorter = Scenario(topology="three-path", epsilon=eps,
                          measurement="exit-orthogonal", condition="detectorD",
                          mode="betting", trials=n, seed=4)
        report3 = betting_game(sorter)
        assert report3.bet_rate == 1.0 and report3.n_wins == report3.n_bets
        stats3 = run_trials(sorter.with_overrides(mode="montecarlo"))
        assert stats3.bob_counts()["i"] == 0
        within_budget(start)

        replay_a = run_trials(verify)
        replay_b = run_trials(verify)
        assert replay_a.counts == replay_b.counts == stats.counts


def test_criterion_10_min_error_rates():
    with criterion(10, "minimum-error rates match the optimal-measurement oracle"):
        for eps in (0.01, 0.04, 0.1):
            family = build_family(eps)
            closed = min_error_success(eps, "three-path")
            assert closed == pytest.approx(
                (np.sqrt(1.0 - 2.0 * eps) + 2.0 * np.sqrt(eps)) ** 2 / 3.0, abs=TOL)
            optimum = sdp_min_error_success(
                [family.psi_a, family.psi_b, family.psi_c], [1.0 / 3.0] * 3)
            assert abs(closed - optimum) <= 1e-6
        for eps in (0.04, 0.1, 0.25):
            model = TwoPathModel(eps)
            closed = min_error_success(eps, "two-path")
            assert closed == pytest.approx(0.5 + np.sqrt(eps * (1.0 - eps)), abs=TOL)
            optimum = sdp_min_error_success([model.psi_a, model.psi_b], [0.5, 0.5])
            assert abs(closed - optimum) <= 1e-6
