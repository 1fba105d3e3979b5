"""Seeded Monte Carlo over exact joint outcome distributions.

Alice detects the particle at an exit; Bob measures the path marker.  The
two measurements commute, so instead of sequential collapse the sampler
draws (alice, bob) pairs from the precomputed exact joint Born distribution
of each scenario - simpler and exactly correct.

Where the arriving amplitudes are incoherent, a trial also carries the
operationally verifiable ground truth (which checkpoint, or loop versus
bypass).  The betting game scores Bob's conclusive outcomes against that
truth; for unambiguous and exit-sorting measurements the win rate is exactly
one, with no tolerance.

Sampling uses a counter-based generator keyed by (seed, block index), so
trial blocks are reproducible independently of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import discrimination, marker, optics, twopath
from .errors import ContractError, DomainError, ScenarioError
from .interferometer import REMOVED_BS3, REMOVED_BS4, _U_INNER, _U_OUTER
from .scenario import Scenario

BLOCK_SIZE = 1 << 16
Z_THRESHOLD = 5.0


@dataclass(frozen=True)
class Cell:
    """One outcome cell of the exact joint distribution."""

    alice: str
    bob: str
    probability: float
    truth: Optional[str] = None


@dataclass(frozen=True)
class TrialModel:
    """Exact joint distribution plus the betting rules of one scenario."""

    cells: tuple
    alice_labels: tuple
    bob_labels: tuple
    predictions: dict      # conclusive bob outcome -> truth label it asserts
    challenge: frozenset   # alice outcomes on which bets are scored

    def joint_probabilities(self) -> dict:
        joint = {}
        for cell in self.cells:
            key = (cell.alice, cell.bob)
            joint[key] = joint.get(key, 0.0) + cell.probability
        return joint

    def alice_marginal(self) -> dict:
        marginal = dict.fromkeys(self.alice_labels, 0.0)
        for cell in self.cells:
            marginal[cell.alice] += cell.probability
        return marginal

    def bob_marginal(self) -> dict:
        marginal = dict.fromkeys(self.bob_labels, 0.0)
        for cell in self.cells:
            marginal[cell.bob] += cell.probability
        return marginal


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    alice_outcome: str
    bob_outcome: str
    bet_placed: bool
    bet_won: Optional[bool] = None


@dataclass(frozen=True)
class TrialStats:
    """Tallies of a sampled run; counts sum to n."""

    n: int
    seed: int
    counts: dict           # (alice, bob) -> int
    model: TrialModel
    records: tuple = ()

    def alice_counts(self) -> dict:
        out = dict.fromkeys(self.model.alice_labels, 0)
        for (alice, _), k in self.counts.items():
            out[alice] += k
        return out

    def bob_counts(self) -> dict:
        out = dict.fromkeys(self.model.bob_labels, 0)
        for (_, bob), k in self.counts.items():
            out[bob] += k
        return out


@dataclass(frozen=True)
class BetReport:
    n_trials: int
    n_bets: int
    n_wins: int

    @property
    def bet_rate(self) -> float:
        return self.n_bets / self.n_trials if self.n_trials else 0.0

    @property
    def win_rate(self) -> float:
        return self.n_wins / self.n_bets if self.n_bets else 1.0

    @property
    def all_bets_won(self) -> bool:
        return self.n_wins == self.n_bets


@dataclass(frozen=True)
class ZCheck:
    outcome: str
    analytic: float
    observed: int
    n: int
    z: float
    exact: bool
    passed: bool


# ---------------------------------------------------------------------------
# Scenario -> exact joint model
# ---------------------------------------------------------------------------

def _three_path_arms(scenario: Scenario) -> list:
    """Per-exit unnormalized marker vectors [(exit, truth, vector)].

    The joint marker-path block at the checkpoints is evolved through the
    configured third and fourth splitter positions; blocked links zero their
    path amplitude before that evolution.  The detector exit decomposes into
    incoherent bypass and loop branches carrying the verifiable truth.
    """
    family = marker.build_family(scenario.epsilon)
    psi_c = np.exp(1j * scenario.phase) * family.psi_c
    block = np.column_stack([family.psi_a, family.psi_b, psi_c]) / np.sqrt(3.0)
    for path in scenario.blocked_paths:
        block[:, ("i", "ii", "iii").index(path)] = 0.0

    present = scenario.beam_splitters
    if not {"BS1", "BS2"} <= present:
        raise ScenarioError("three-path scenarios need at least BS1 and BS2")
    m3 = _U_INNER if "BS3" in present else REMOVED_BS3
    m4 = _U_OUTER if "BS4" in present else REMOVED_BS4
    evolved = block @ (m4 @ m3).T

    arms = []
    if present == {"BS1", "BS2"}:
        truth_by_exit = {"i": "B", "ii": "C", "iii": "A"}
        for k, exit_label in enumerate(("i", "ii", "iii")):
            arms.append((exit_label, truth_by_exit[exit_label], evolved[:, k]))
    elif present == {"BS1", "BS2", "BS3"}:
        truth_by_exit = {"i": None, "ii": "via-C", "iii": "via-loop"}
        for k, exit_label in enumerate(("i", "ii", "iii")):
            arms.append((exit_label, truth_by_exit[exit_label], evolved[:, k]))
    elif present == {"BS1", "BS2", "BS3", "BS4"}:
        arms.append(("i", None, evolved[:, 0]))
        arms.append(("ii", None, evolved[:, 1]))
        # The amplitudes reaching the final splitter are incoherent: the
        # detector exit decomposes into bypass and loop branches carrying
        # the verifiable truth.
        bypass_block = block.copy()
        bypass_block[:, :2] = 0.0
        loop_block = block.copy()
        loop_block[:, 2] = 0.0
        m = (m4 @ m3).T
        arms.append(("iii", "via-C", (bypass_block @ m)[:, 2]))
        arms.append(("iii", "via-loop", (loop_block @ m)[:, 2]))
    else:
        raise ScenarioError(
            f"unsupported beam-splitter set {sorted(present)} for three-path")
    return arms


def _two_path_arms(scenario: Scenario) -> list:
    if scenario.blocked_paths:
        raise ScenarioError("blocked paths apply to the three-path topology only")
    model = twopath.TwoPathModel(scenario.epsilon, scenario.phase)
    block = np.column_stack([
        np.exp(1j * scenario.phase) * model.psi_a, model.psi_b]) / np.sqrt(2.0)
    present = scenario.beam_splitters
    if present == {"BS2"}:
        return [("i", "A", block[:, 0]), ("ii", "B", block[:, 1])]
    if present == {"BS2", "BS3"}:
        evolved = block @ twopath.LOOP_SPLITTER.T
        return [("i", None, evolved[:, 0]), ("ii", None, evolved[:, 1])]
    raise ScenarioError(
        f"unsupported beam-splitter set {sorted(present)} for two-path")


def _bob_povm(scenario: Scenario):
    """Bob's measurement and the truth asserted by each conclusive outcome."""
    three = scenario.topology == "three-path"
    conditioned = scenario.condition == "detectorD"
    if scenario.measurement == "none":
        return None, {}
    if scenario.measurement == "ud":
        if three:
            povm = discrimination.ud3(scenario.epsilon).povm
            if conditioned:
                predictions = {"A": "via-loop", "B": "via-loop", "C": "via-C"}
            else:
                predictions = {"A": "A", "B": "B", "C": "C"}
        else:
            povm = discrimination.ud2(scenario.epsilon).povm
            predictions = {"A": "A", "B": "B"}
        return povm, predictions
    if scenario.measurement == "exit-orthogonal":
        if not three:
            raise ScenarioError("exit-orthogonal is a three-path measurement")
        povm = discrimination.exit_povm(scenario.epsilon).povm
        return povm, {"ii": "via-C", "iii": "via-loop"}
    if scenario.measurement == "min-error":
        if three:
            povm = optics.compile_setup(optics.path_qutrit_mem_setup())
            predictions = {"A": "A", "B": "B", "C": "C"}
        else:
            povm = discrimination.mem2()
            predictions = {"A": "A", "B": "B"}
        return povm, predictions
    raise ScenarioError(f"unknown measurement {scenario.measurement!r}")


def _condition_exits(scenario: Scenario) -> Optional[set]:
    if scenario.condition == "unconditioned":
        return None
    if scenario.condition == "detectorD":
        if scenario.topology == "three-path":
            if "BS4" not in scenario.beam_splitters:
                raise ScenarioError("detector-D conditioning needs BS4 in place")
            return {"iii"}
        if "BS3" not in scenario.beam_splitters:
            raise ScenarioError("detector-D conditioning needs BS3 in place")
        return {"ii"}
    if scenario.condition in ("exit-i", "exit-ii"):
        return {scenario.condition.split("-")[1]}
    raise ScenarioError(f"unknown condition {scenario.condition!r}")


def _outcome_probs(vector: np.ndarray, povm) -> dict:
    return {label: max(float(np.real(vector.conj() @ povm.element(label) @ vector)), 0.0)
            for label in povm.labels}


def build_trial_model(scenario: Scenario) -> TrialModel:
    """Exact joint (alice, bob) distribution of a scenario, conditioned and
    normalized, together with the betting rules it supports.

    Exits with several truth branches keep the branch split only when it
    reproduces the coherent Born probabilities outcome by outcome (true for
    the unambiguous and exit-sorting measurements); otherwise the branches
    merge into one coherent cell without a truth label.
    """
    arms = (_three_path_arms(scenario) if scenario.topology == "three-path"
            else _two_path_arms(scenario))
    povm, predictions = _bob_povm(scenario)
    keep = _condition_exits(scenario)
    if keep is not None:
        arms = [arm for arm in arms if arm[0] in keep]

    grouped: dict = {}
    for exit_label, truth, vector in arms:
        grouped.setdefault(exit_label, []).append((truth, vector))

    bob_labels = tuple(povm.labels) if povm is not None else ("-",)
    cells = []
    for exit_label, branches in grouped.items():
        if povm is None:
            for truth, vector in branches:
                weight = float(np.real(np.vdot(vector, vector)))
                cells.append(Cell(exit_label, "-", weight, truth))
            continue
        split = [(truth, _outcome_probs(vector, povm)) for truth, vector in branches]
        if len(branches) > 1:
            coherent = sum(vector for _, vector in branches)
            merged = _outcome_probs(coherent, povm)
            deviation = max(abs(merged[label] - sum(probs[label] for _, probs in split))
                            for label in povm.labels)
            if deviation > 1e-12:
                split = [(None, merged)]
        for truth, probs in split:
            for label in povm.labels:
                cells.append(Cell(exit_label, label, probs[label], truth))

    total = sum(cell.probability for cell in cells)
    if total <= 1e-15:
        raise ScenarioError("conditioning selects a zero-probability event")
    # Rounding dust must not defeat the exact-count contract for
    # probability-zero outcomes: snap it to a hard zero.
    floor = 1e-13 * max(cell.probability for cell in cells)
    cells = tuple(
        Cell(c.alice, c.bob,
             c.probability / total if c.probability > floor else 0.0, c.truth)
        for c in cells)
    alice_labels = tuple(dict.fromkeys(cell.alice for cell in cells))
    challenge = frozenset(
        cell.alice for cell in cells if cell.truth is not None and cell.truth != "-")
    return TrialModel(cells=cells, alice_labels=alice_labels, bob_labels=bob_labels,
                      predictions=predictions, challenge=challenge)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream for one block of trials.

    Streams keyed by (seed, block) are independent, so blocks parallelize
    without coupling and any sub-range of trials regenerates identically.
    """

    seed: int
    block: int

    def generator(self) -> np.random.Generator:
        key = np.array([np.uint64(self.seed), np.uint64(self.block)],
                       dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def sample_cells(model: TrialModel, n: int, seed: int) -> np.ndarray:
    """Deterministic cell indices for trials 0..n-1 under the given seed.

    Trial i belongs to block i // BLOCK_SIZE; each block draws from its own
    counter-based stream, so any contiguous sub-range can be regenerated
    independently and merged in any order.
    """
    if n < 0:
        raise DomainError("trial count must be nonnegative")
    probs = np.array([cell.probability for cell in model.cells])
    cumulative = np.cumsum(probs)
    cumulative[-1] = 1.0
    out = np.empty(n, dtype=np.int64)
    for block_start in range(0, n, BLOCK_SIZE):
        count = min(BLOCK_SIZE, n - block_start)
        stream = RngStream(seed=seed, block=block_start // BLOCK_SIZE)
        uniforms = stream.generator().random(count)
        out[block_start:block_start + count] = np.searchsorted(
            cumulative, uniforms, side="right")
    return out


def run_trials(scenario: Scenario, n: int = None, seed: int = None,
               keep_records: bool = False) -> TrialStats:
    """Sample n trials from the scenario's exact joint distribution.

    Identical (scenario, n, seed) reproduce identical tallies and records.
    """
    n = scenario.trials if n is None else int(n)
    seed = scenario.resolved_seed() if seed is None else int(seed)
    model = build_trial_model(scenario)
    indices = sample_cells(model, n, seed)
    tallies = np.bincount(indices, minlength=len(model.cells))
    counts = {}
    for cell, tally in zip(model.cells, tallies):
        key = (cell.alice, cell.bob)
        counts[key] = counts.get(key, 0) + int(tally)
    records = ()
    if keep_records:
        records = tuple(
            _record(model, int(idx), i) for i, idx in enumerate(indices))
    return TrialStats(n=n, seed=seed, counts=counts, model=model, records=records)


def _record(model: TrialModel, cell_index: int, trial_index: int) -> TrialRecord:
    cell = model.cells[cell_index]
    placed = cell.alice in model.challenge and cell.bob in model.predictions
    won = None
    if placed:
        won = model.predictions[cell.bob] == cell.truth
    return TrialRecord(trial_index=trial_index, alice_outcome=cell.alice,
                       bob_outcome=cell.bob, bet_placed=placed, bet_won=won)


def betting_game(scenario: Scenario, n: int = None, seed: int = None) -> BetReport:
    """Play the verification betting game over n sampled trials.

    Bob bets whenever his outcome is conclusive (on challenged exits); a bet
    wins when the asserted truth matches the trial's ground truth.  Requires
    a scenario whose configuration defines that truth operationally.
    """
    if scenario.measurement == "none":
        raise ContractError("the betting game needs a discrimination measurement")
    n = scenario.trials if n is None else int(n)
    seed = scenario.resolved_seed() if seed is None else int(seed)
    model = build_trial_model(scenario)
    if not model.predictions:
        raise ScenarioError("no conclusive outcomes to bet on in this scenario")
    if not model.challenge:
        raise ScenarioError(
            "betting requires a configuration with verifiable paths "
            "(a verification mode or detector-D conditioning)")
    for cell in model.cells:
        if (cell.probability > 0.0 and cell.alice in model.challenge
                and cell.bob in model.predictions and cell.truth is None):
            raise ScenarioError(
                "bets on this exit mix verifiable and unverifiable branches")
    indices = sample_cells(model, n, seed)
    tallies = np.bincount(indices, minlength=len(model.cells))
    n_bets = 0
    n_wins = 0
    for cell, tally in zip(model.cells, tallies):
        if cell.alice in model.challenge and cell.bob in model.predictions:
            n_bets += int(tally)
            if model.predictions[cell.bob] == cell.truth:
                n_wins += int(tally)
    return BetReport(n_trials=n, n_bets=n_bets, n_wins=n_wins)


def compare_to_analytic(counts: dict, n: int, analytic: dict) -> dict:
    """Z-score every outcome frequency against its analytic probability.

    Probability-zero (or one) outcomes are checked by exact count instead of
    a z-score: the betting game's zero-error claims must not hide behind a
    tolerance.
    """
    if set(counts) != set(analytic):
        raise ContractError(
            f"outcome label sets differ: {sorted(counts)} vs {sorted(analytic)}")
    checks = {}
    for outcome, p in analytic.items():
        observed = int(counts[outcome])
        if p <= 0.0 or p >= 1.0:
            expected = 0 if p <= 0.0 else n
            checks[outcome] = ZCheck(outcome=outcome, analytic=p, observed=observed,
                                     n=n, z=0.0, exact=True,
                                     passed=observed == expected)
            continue
        sigma = np.sqrt(p * (1.0 - p) / n)
        z = (observed / n - p) / sigma
        checks[outcome] = ZCheck(outcome=outcome, analytic=p, observed=observed,
                                 n=n, z=float(z), exact=False,
                                 passed=bool(abs(z) <= Z_THRESHOLD))
    return checks
