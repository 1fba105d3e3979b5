"""Three-path beam-splitter network with weak path marking.

The network runs a particle from a source column ``(0,0,1)`` through four
beam splitters to a detector probing ``(0,0,1)``.  Five checkpoints sit on
the three paths: A and B inside the internal loop, C on the bypass path, E at
the loop entrance (between the first and second splitters) and F at the loop
exit (between the third and fourth).  Each checkpoint can carry a weak marker
interaction, modeled as a unitary on that checkpoint's private qubit.

Stage indexing: stage ``k`` is the state after ``k`` beam splitters.  The E
interaction acts after stage 1, the A/B/C interactions (and any link phases)
act at stage 2, blocked links cut amplitudes between stage 2 and stage 3, and
the F interaction acts after stage 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import ContractError, DomainError, ShapeError, SingularPostselectionError
from .qcore import DEFAULT_TOL, DensityOperator, StateVector, is_hermitian

PATHS = ("i", "ii", "iii")
BEAM_SPLITTERS = ("BS1", "BS2", "BS3", "BS4")
CHECKPOINTS = ("A", "B", "C", "E", "F")

SOURCE = np.array([0.0, 0.0, 1.0], dtype=np.complex128)
DETECTOR = SOURCE

_U_OUTER = np.array(
    [[np.sqrt(3.0), 0.0, 0.0], [0.0, -1.0, np.sqrt(2.0)], [0.0, np.sqrt(2.0), 1.0]],
    dtype=np.complex128,
) / np.sqrt(3.0)
_U_INNER = np.array(
    [[1.0, 1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, np.sqrt(2.0)]],
    dtype=np.complex128,
) / np.sqrt(2.0)

#: Permutation matrices standing in for removed third/fourth beam splitters:
#: the beams cross the empty mount and continue under relabeled exits.
REMOVED_BS3 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=np.complex128)
REMOVED_BS4 = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=np.complex128)


def standard_unitaries() -> dict:
    """The four 3x3 beam-splitter matrices; the outer pair and the inner pair
    are equal by the symmetry of the setup."""
    return {"U1": _U_OUTER.copy(), "U2": _U_INNER.copy(),
            "U3": _U_INNER.copy(), "U4": _U_OUTER.copy()}


@dataclass(frozen=True)
class NetworkConfig:
    """Which beam splitters are present, link phases, and blocked links.

    ``replacement_mode`` selects the crossed-beam permutation matrices for
    absent third/fourth splitters; without it an absent splitter is an
    identity (beams keep their labels).  ``link_phases`` are the checkpoint
    phases (alpha, beta, gamma) picked up on paths i, ii, iii at stage 2.
    Blocked links zero the corresponding amplitude after the checkpoints
    without renormalizing: downstream probabilities stay absolute.
    """

    beam_splitters: frozenset = frozenset(BEAM_SPLITTERS)
    replacement_mode: bool = True
    link_phases: tuple = (0.0, 0.0, 0.0)
    blocked_paths: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "beam_splitters", frozenset(self.beam_splitters))
        object.__setattr__(self, "blocked_paths", frozenset(self.blocked_paths))
        unknown = self.beam_splitters - set(BEAM_SPLITTERS)
        if unknown:
            raise DomainError(f"unknown beam splitters: {sorted(unknown)}")
        if not self.blocked_paths <= set(PATHS):
            raise DomainError(f"blocked paths must be a subset of {PATHS}")
        phases = tuple(float(p) for p in self.link_phases)
        if len(phases) != 3 or not all(np.isfinite(phases)):
            raise DomainError("link_phases must be three finite angles")
        object.__setattr__(self, "link_phases", phases)

    def splitter_matrix(self, index: int) -> np.ndarray:
        """3x3 matrix acting at beam-splitter position ``index`` (1..4)."""
        name = f"BS{index}"
        if name in self.beam_splitters:
            return _U_OUTER if index in (1, 4) else _U_INNER
        if self.replacement_mode and index == 3:
            return REMOVED_BS3
        if self.replacement_mode and index == 4:
            return REMOVED_BS4
        return np.eye(3, dtype=np.complex128)

    def phase_matrix(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.asarray(self.link_phases)))

    def block_matrix(self) -> np.ndarray:
        keep = [0.0 if p in self.blocked_paths else 1.0 for p in PATHS]
        return np.diag(np.asarray(keep, dtype=np.complex128))


STANDARD_CONFIG = NetworkConfig()


def _scalar_stages(config: NetworkConfig) -> list:
    """The four stage matrices with phases/blocks folded into stage 3."""
    m3 = config.splitter_matrix(3) @ config.block_matrix() @ config.phase_matrix()
    return [config.splitter_matrix(1), config.splitter_matrix(2), m3,
            config.splitter_matrix(4)]


def forward_state(config: NetworkConfig = STANDARD_CONFIG, stage: int = 4) -> StateVector:
    """Path amplitudes of the source particle after ``stage`` beam splitters."""
    if stage not in range(5):
        raise DomainError(f"stage must be 0..4, got {stage}")
    vec = SOURCE.copy()
    for mat in _scalar_stages(config)[:stage]:
        vec = mat @ vec
    return StateVector(vec)


def backward_state(config: NetworkConfig = STANDARD_CONFIG, stage: int = 4) -> StateVector:
    """Detector state back-propagated to ``stage``, returned as a column.

    The entries are the conjugates of the bra row, so the overlap with the
    forward state at the same stage is ``vdot(backward, forward)``.
    """
    if stage not in range(5):
        raise DomainError(f"stage must be 0..4, got {stage}")
    row = DETECTOR.copy()
    for mat in reversed(_scalar_stages(config)[stage:]):
        row = row @ mat
    return StateVector(row.conj())


@dataclass(frozen=True)
class WeakValueTriple:
    """Weak values of the three path projectors at one split; they sum to 1."""

    w_i: complex
    w_ii: complex
    w_iii: complex

    def as_tuple(self) -> tuple:
        return (self.w_i, self.w_ii, self.w_iii)


def weak_values(split: int, config: NetworkConfig = STANDARD_CONFIG) -> WeakValueTriple:
    """Weak values for the split with ``split`` beam splitters acting on the bra.

    Split 0 has all four splitters acting on the forward ket (projectors
    inserted at the detector); split 4 has all acting on the bra (projectors
    at the source).  The symmetric split 2 probes the checkpoints A, B, C.
    """
    if split not in range(5):
        raise DomainError(f"split must be 0..4, got {split}")
    stage = 4 - split
    fwd = forward_state(config, stage).amps
    bwd = backward_state(config, stage).amps
    amp = np.vdot(bwd, fwd)
    if abs(amp) <= DEFAULT_TOL:
        raise SingularPostselectionError(
            "post-selection amplitude vanishes; weak values are undefined")
    values = bwd.conj() * fwd / amp
    return WeakValueTriple(*map(complex, values))


# ---------------------------------------------------------------------------
# Marked network: checkpoint operators on one qubit per checkpoint.
# ---------------------------------------------------------------------------

_QUBIT_GROUND = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.complex128)


def _validated_unitary_2x2(mat, tol: float) -> np.ndarray:
    arr = np.asarray(mat, dtype=np.complex128)
    if arr.shape != (2, 2):
        raise ShapeError("checkpoint marker operators must be 2x2")
    if np.max(np.abs(arr.conj().T @ arr - np.eye(2))) > tol:
        raise ContractError("checkpoint marker operator is not unitary")
    return arr


def marking_rotation(epsilon: float, overlap_scale: float = 3.0) -> np.ndarray:
    """Real qubit rotation whose ground-state expectation is
    ``sqrt(1 - overlap_scale * epsilon)``."""
    c = np.sqrt(1.0 - overlap_scale * epsilon)
    s = np.sqrt(overlap_scale * epsilon)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


@dataclass(frozen=True)
class CheckpointMarkers:
    """Unitary marker operators for checkpoints A, B, C, E, F.

    Each checkpoint owns one qubit, so the five operators commute across
    checkpoints by construction and the initial marker state factorizes into
    the five single-qubit states in ``initial``.
    """

    a: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=np.complex128))
    b: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=np.complex128))
    c: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=np.complex128))
    e: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=np.complex128))
    f: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=np.complex128))
    initial: tuple = None
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        for name in "abcef":
            object.__setattr__(self, name, _validated_unitary_2x2(getattr(self, name), self.tol))
        initial = self.initial
        if initial is None:
            initial = tuple(_QUBIT_GROUND.copy() for _ in CHECKPOINTS)
        initial = tuple(np.asarray(m, dtype=np.complex128) for m in initial)
        if len(initial) != 5 or any(m.shape != (2, 2) for m in initial):
            raise ShapeError("initial must hold five 2x2 single-qubit states")
        for m in initial:
            if not is_hermitian(m, self.tol) or abs(np.trace(m).real - 1.0) > self.tol:
                raise ContractError("initial marker states must be unit-trace Hermitian")
        object.__setattr__(self, "initial", initial)

    @classmethod
    def identity(cls) -> "CheckpointMarkers":
        return cls()

    @classmethod
    def symmetric(cls, epsilon: float) -> "CheckpointMarkers":
        """Equal-strength marking at A, B and C with trivial E and F.

        The marking rotation leaves ground-state overlap sqrt(1 - 3 epsilon),
        the calibration that keeps the internal loop balanced.
        """
        if not 0.0 <= epsilon <= 1.0 / 3.0:
            raise DomainError(f"epsilon must lie in [0, 1/3], got {epsilon}")
        rot = marking_rotation(epsilon)
        return cls(a=rot, b=rot, c=rot)

    @classmethod
    def phase_only(cls, alpha: float, beta: float, gamma: float = 0.0,
                   phi: float = 0.0, e: np.ndarray = None) -> "CheckpointMarkers":
        """Pure phases at A, B, C, F; only E (optionally) marks genuinely."""
        eye = np.eye(2, dtype=np.complex128)
        e_op = eye if e is None else np.asarray(e, dtype=np.complex128)
        return cls(a=np.exp(1j * alpha) * eye, b=np.exp(1j * beta) * eye,
                   c=np.exp(1j * gamma) * eye, e=e_op, f=np.exp(1j * phi) * eye)

    def operators(self) -> dict:
        return dict(zip(CHECKPOINTS, (self.a, self.b, self.c, self.e, self.f)))

    def expectation(self, checkpoint: str) -> complex:
        """Single-checkpoint expectation value tr(X rho_X)."""
        idx = CHECKPOINTS.index(checkpoint)
        op = (self.a, self.b, self.c, self.e, self.f)[idx]
        return complex(np.trace(op @ self.initial[idx]))

    def initial_joint(self) -> np.ndarray:
        """Initial state of the full five-qubit marker space (32 x 32)."""
        return reduce(np.kron, self.initial)

    def embedded(self, checkpoint: str) -> np.ndarray:
        """Marker operator embedded as a single factor of the 5-qubit space."""
        idx = CHECKPOINTS.index(checkpoint)
        ops = [np.eye(2, dtype=np.complex128)] * 5
        ops[idx] = (self.a, self.b, self.c, self.e, self.f)[idx]
        return reduce(np.kron, ops)

    def epsilon(self) -> float:
        """Loop-marking strength: probability of reaching checkpoint F."""
        value = (1.0 - np.real(np.conj(self.expectation("A")) * self.expectation("B"))) / 3.0
        return float(value)


class OperatorMatrix:
    """Matrix over the three paths whose entries are marker-space operators.

    Stored as an array of shape (3, 3, d, d).  Matrix multiplication composes
    path structure and operator products simultaneously, which is how the
    marked network's transfer operators are assembled and factorized.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: np.ndarray):
        arr = np.asarray(entries, dtype=np.complex128)
        if arr.ndim != 4 or arr.shape[0] != arr.shape[1] or arr.shape[2] != arr.shape[3]:
            raise ShapeError(f"expected shape (n, n, d, d), got {arr.shape}")
        self.entries = arr

    @classmethod
    def from_scalar(cls, matrix: np.ndarray, dim: int) -> "OperatorMatrix":
        eye = np.eye(dim, dtype=np.complex128)
        mat = np.asarray(matrix, dtype=np.complex128)
        return cls(mat[:, :, None, None] * eye[None, None, :, :])

    @classmethod
    def from_diagonal(cls, ops) -> "OperatorMatrix":
        ops = [np.asarray(op, dtype=np.complex128) for op in ops]
        dim = ops[0].shape[0]
        arr = np.zeros((len(ops), len(ops), dim, dim), dtype=np.complex128)
        for k, op in enumerate(ops):
            arr[k, k] = op
        return cls(arr)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(np.einsum("ijab,jkbc->ikac", self.entries, other.entries))

    def entry(self, row: int, col: int) -> np.ndarray:
        return self.entries[row, col]

    def apply_right(self, column: np.ndarray) -> np.ndarray:
        """Contract with a scalar path column: result[i] = sum_j M[i,j] col[j]."""
        return np.einsum("ijab,j->iab", self.entries, np.asarray(column, dtype=np.complex128))

    def apply_left(self, row: np.ndarray) -> np.ndarray:
        """Contract with a scalar path row: result[j] = sum_i row[i] M[i,j]."""
        return np.einsum("i,ijab->jab", np.asarray(row, dtype=np.complex128), self.entries)


def _marked_chain(markers: CheckpointMarkers, config: NetworkConfig) -> list:
    """The seven factors of the marked network, first-acting first.

    Order: BS1, E link, BS2, checkpoint row A/B/C (with link phases and
    blocks), BS3, F link, BS4.
    """
    dim = 32
    eye = np.eye(dim, dtype=np.complex128)
    a, b, c = markers.embedded("A"), markers.embedded("B"), markers.embedded("C")
    phases = np.exp(1j * np.asarray(config.link_phases))
    blocks = [0.0 if p in config.blocked_paths else 1.0 for p in PATHS]
    check = OperatorMatrix.from_diagonal([
        blocks[0] * phases[0] * a, blocks[1] * phases[1] * b, blocks[2] * phases[2] * c])
    return [
        OperatorMatrix.from_scalar(config.splitter_matrix(1), dim),
        OperatorMatrix.from_diagonal([eye, markers.embedded("E"), eye]),
        OperatorMatrix.from_scalar(config.splitter_matrix(2), dim),
        check,
        OperatorMatrix.from_scalar(config.splitter_matrix(3), dim),
        OperatorMatrix.from_diagonal([eye, markers.embedded("F"), eye]),
        OperatorMatrix.from_scalar(config.splitter_matrix(4), dim),
    ]


@dataclass(frozen=True)
class MarkedTransfer:
    """Full marked network: the operator-valued transfer matrix plus the
    source-to-detector and source-to-loop-exit transfer operators."""

    matrix: OperatorMatrix
    t_fin: np.ndarray
    t_f: np.ndarray
    markers: CheckpointMarkers
    config: NetworkConfig

    def detection_probability(self) -> float:
        rho = self.markers.initial_joint()
        return float(np.real(np.trace(self.t_fin @ rho @ self.t_fin.conj().T)))


def marked_transfer(markers: CheckpointMarkers,
                    config: NetworkConfig = STANDARD_CONFIG) -> MarkedTransfer:
    """Assemble the operator-valued transfer matrix of the marked network."""
    chain = _marked_chain(markers, config)
    full = reduce(lambda acc, factor: factor @ acc, chain)
    # Loop-exit transfer: amplitude operator from the source (path iii) into
    # path ii right after the third splitter.
    partial = reduce(lambda acc, factor: factor @ acc, chain[:5])
    t_f = partial.entry(1, 2)
    t_fin = full.entry(2, 2)
    return MarkedTransfer(matrix=full, t_fin=t_fin, t_f=t_f,
                          markers=markers, config=config)


def detection_probability(markers: CheckpointMarkers,
                          config: NetworkConfig = STANDARD_CONFIG) -> float:
    """Probability that the next source particle fires the detector."""
    return marked_transfer(markers, config).detection_probability()


def loop_probability(markers: CheckpointMarkers,
                     config: NetworkConfig = STANDARD_CONFIG) -> float:
    """Probability that the next source particle reaches checkpoint F."""
    transfer = marked_transfer(markers, config)
    rho = markers.initial_joint()
    return float(np.real(np.trace(transfer.t_f @ rho @ transfer.t_f.conj().T)))


def conditional_marker_state(markers: CheckpointMarkers, checkpoint: str) -> DensityOperator:
    """Final single-checkpoint marker state conditioned on a detector click.

    Valid under the balanced-loop calibration where the A and B expectation
    values are equal; the detection probability is then (1 + 6 eps)/9 and the
    cross terms of the exact reduced state vanish.
    """
    if checkpoint not in ("E", "C", "F"):
        raise DomainError(f"checkpoint must be one of E, C, F, got {checkpoint!r}")
    exp_a = markers.expectation("A")
    exp_b = markers.expectation("B")
    if abs(exp_a - exp_b) > 1e-9:
        raise ContractError(
            "conditional marker states require the balanced calibration <A> = <B>")
    eps = markers.epsilon()
    if not -DEFAULT_TOL <= eps <= 1.0 / 3.0 + DEFAULT_TOL:
        raise DomainError(f"marking strength {eps} outside [0, 1/3]")
    idx = CHECKPOINTS.index(checkpoint)
    rho0 = markers.initial[idx]
    op = markers.operators()[checkpoint]
    turned = op @ rho0 @ op.conj().T
    if checkpoint == "C":
        mat = (turned + 6.0 * eps * rho0) / (1.0 + 6.0 * eps)
    else:
        mat = (rho0 + 6.0 * eps * turned) / (1.0 + 6.0 * eps)
    return DensityOperator(mat)


def net_loop_amplitude(alpha: float, beta: float, phi: float) -> complex:
    """Net amplitude with which the loop marker acts under pure-phase marking.

    This is the difference of the two loop-path amplitudes; it vanishes when
    the internal loop interferes destructively toward the final splitter.
    """
    return complex(np.exp(1j * phi) * (np.exp(1j * alpha) - np.exp(1j * beta)))


def split_factorizations(config: NetworkConfig = STANDARD_CONFIG) -> list:
    """The five bra-ket evaluations of the source-to-detector amplitude.

    Product ``k`` back-propagates the detector through ``k`` splitters and
    forward-propagates the source through ``4 - k``.
    """
    products = []
    for split in range(5):
        stage = 4 - split
        fwd = forward_state(config, stage).amps
        bwd = backward_state(config, stage).amps
        products.append(complex(np.vdot(bwd, fwd)))
    return products


def operator_split_factorizations(markers: CheckpointMarkers,
                                  config: NetworkConfig = STANDARD_CONFIG) -> list:
    """Source-to-detector transfer operator evaluated at every chain cut.

    The marked network is a product of seven factors, so there are eight cut
    positions; each yields the same marker-space operator.
    """
    chain = _marked_chain(markers, config)
    products = []
    for cut in range(len(chain) + 1):
        right = SOURCE.copy()[:, None, None] * np.eye(32, dtype=np.complex128)[None, :, :]
        for factor in chain[:cut]:
            right = np.einsum("ijab,jbc->iac", factor.entries, right)
        left = DETECTOR.copy()[:, None, None] * np.eye(32, dtype=np.complex128)[None, :, :]
        for factor in reversed(chain[cut:]):
            left = np.einsum("jab,jibc->iac", left, factor.entries)
        products.append(np.einsum("iab,ibc->ac", left, right))
    return products


#: Closed form of the full standard product of the four splitter matrices.
FULL_PRODUCT = np.array(
    [[0.0, -np.sqrt(3.0), np.sqrt(6.0)],
     [np.sqrt(3.0), 2.0, np.sqrt(2.0)],
     [-np.sqrt(6.0), np.sqrt(2.0), 1.0]], dtype=np.complex128) / 3.0


def verify_splits(markers: CheckpointMarkers = None,
                  config: NetworkConfig = STANDARD_CONFIG) -> dict:
    """Cross-check every factorization identity of the network.

    Returns a mapping from identity name to maximum absolute deviation; all
    entries are ~1e-16 for a correctly assembled network.  For the standard
    configuration the products are also compared against their closed forms.
    """
    stages = _scalar_stages(config)
    full = reduce(lambda acc, m: m @ acc, stages)
    report = {}
    for cut in (1, 2, 3):
        left = reduce(lambda acc, m: m @ acc, stages[cut:])
        right = reduce(lambda acc, m: m @ acc, stages[:cut])
        report[f"matrix-product-cut-{cut}"] = float(np.max(np.abs(left @ right - full)))
    amplitudes = split_factorizations(config)
    reference = amplitudes[0]
    report["inner-products-agree"] = float(max(abs(a - reference) for a in amplitudes))
    if config == STANDARD_CONFIG:
        report["full-product-closed-form"] = float(np.max(np.abs(full - FULL_PRODUCT)))
        report["inner-products-value"] = float(
            max(abs(a - 1.0 / 3.0) for a in amplitudes))
    if markers is not None:
        operators = operator_split_factorizations(markers, config)
        t_fin = marked_transfer(markers, config).t_fin
        report["operator-products-agree"] = float(
            max(np.max(np.abs(op - t_fin)) for op in operators))
    return report
