"""Optical realizations: element gates, pair sources, compiled POVMs.

A setup is an ordered list of elements acting on labeled modes, where a mode
is a (path, polarization) pair.  Elements are unitary on their declared
modes; detectors and polarizers are projective sinks.  Compiling a setup
propagates each input basis amplitude through the elements and collects, for
every detector label, the quadratic form of the absorbed amplitudes - a POVM
over the detector labels.  Lossless setups conserve probability, so the
compiled elements sum to the identity.

Half-wave plate angles are stored as set angles; builders derive the angles
their discrimination targets require instead of taking them as input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError, ShapeError, WiringError
from .interferometer import _U_INNER, _U_OUTER
from .qcore import DEFAULT_TOL, Povm, StateVector, UnitaryOperator

SBS_MATRIX = np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=np.complex128) / np.sqrt(2.0)
#: 2x2 block of the outer three-path splitter acting on paths (ii, iii).
OUTER_SPLITTER_BLOCK = np.array([[-1.0, np.sqrt(2.0)], [np.sqrt(2.0), 1.0]],
                                dtype=np.complex128) / np.sqrt(3.0)

PAIR_SOURCE_KINDS = ("two-path-polarization", "three-path-entangled")


def hwp(theta: float) -> UnitaryOperator:
    """Half-wave plate at set angle ``theta`` (radians) on (v, h) amplitudes."""
    if not np.isfinite(theta):
        raise DomainError("half-wave plate angle must be finite")
    c, s = np.cos(2.0 * theta), np.sin(2.0 * theta)
    return UnitaryOperator(np.array([[c, s], [s, -c]], dtype=np.complex128))


def _hwp_for_cos(cos2theta: float) -> float:
    """Set angle whose doubled cosine equals ``cos2theta``."""
    if not 0.0 <= cos2theta <= 1.0 + DEFAULT_TOL:
        raise DomainError(f"required cos(2 theta) = {cos2theta} not in [0, 1]")
    return 0.5 * float(np.arccos(min(cos2theta, 1.0)))


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Hwp:
    """Half-wave plate in one path."""
    path: str
    theta: float


@dataclass(frozen=True)
class PbsSplit:
    """Polarizing beam splitter: v reflects to one path, h transmits to another."""
    port: str
    v_out: str
    h_out: str


@dataclass(frozen=True)
class PbsMerge:
    """Polarizing beam splitter merging a v beam and an h beam into one path."""
    v_in: str
    h_in: str
    out: str


@dataclass(frozen=True)
class Splitter:
    """Two-port beam splitter acting identically on both polarizations."""
    a: str
    b: str
    matrix: np.ndarray = field(default_factory=lambda: SBS_MATRIX.copy())

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.shape != (2, 2):
            raise ShapeError("splitter matrix must be 2x2")
        if np.max(np.abs(mat.conj().T @ mat - np.eye(2))) > DEFAULT_TOL:
            raise ContractError("splitter matrix must be unitary")
        object.__setattr__(self, "matrix", mat)


def sbs(a: str, b: str) -> Splitter:
    """Symmetric 50/50 beam splitter."""
    return Splitter(a=a, b=b, matrix=SBS_MATRIX.copy())


@dataclass(frozen=True)
class Ppc:
    """Polarization-to-path converter: h goes to the first output path, v to
    the second, both vertically polarized afterwards."""
    port: str
    i_out: str
    ii_out: str


@dataclass(frozen=True)
class PathToPol:
    """Reverse converter: two vertically polarized paths into one path's
    polarization qubit (first input becomes h, second becomes v)."""
    i_in: str
    ii_in: str
    out: str


@dataclass(frozen=True)
class Detector:
    """Projective sink absorbing both polarizations of one path."""
    path: str
    label: str


@dataclass(frozen=True)
class Polarizer:
    """Projective sink absorbing the off-axis polarization of one path."""
    path: str
    axis: str = "v"

    def __post_init__(self):
        if self.axis not in ("v", "h"):
            raise DomainError("polarizer axis must be 'v' or 'h'")


@dataclass(frozen=True)
class OpticalSetup:
    """Ordered element list over labeled modes, with the input embedding.

    ``input_modes[k]`` is the mode fed by the k-th input basis amplitude.
    """

    input_modes: tuple
    elements: tuple
    name: str = ""

    def __post_init__(self):
        modes = tuple((str(p), str(pol)) for p, pol in self.input_modes)
        if len(set(modes)) != len(modes):
            raise WiringError("duplicate input modes")
        if any(pol not in ("v", "h") for _, pol in modes):
            raise DomainError("polarization labels must be 'v' or 'h'")
        object.__setattr__(self, "input_modes", modes)
        object.__setattr__(self, "elements", tuple(self.elements))


class _ModeRegister:
    """Tracks the amplitude row of every live mode during compilation."""

    def __init__(self, input_modes):
        self.dim = len(input_modes)
        self.rows = {}
        for k, mode in enumerate(input_modes):
            row = np.zeros(self.dim, dtype=np.complex128)
            row[k] = 1.0
            self.rows[mode] = row

    def take(self, mode) -> np.ndarray:
        """Remove and return a mode's row (zero row if the mode is dark)."""
        return self.rows.pop(mode, np.zeros(self.dim, dtype=np.complex128))

    def put(self, mode, row: np.ndarray):
        if mode in self.rows and np.any(np.abs(self.rows[mode]) > 0.0):
            raise WiringError(f"two beams routed into mode {mode} without a combiner")
        if np.any(np.abs(row) > 0.0):
            self.rows[mode] = row
        else:
            self.rows.pop(mode, None)

    def apply_unitary(self, modes, matrix):
        stack = np.stack([self.take(m) for m in modes])
        new = np.asarray(matrix) @ stack
        for mode, row in zip(modes, new):
            self.put(mode, row)

    def live_modes(self):
        return [m for m, row in self.rows.items() if np.any(np.abs(row) > 0.0)]


def _apply_element(reg: _ModeRegister, element, outcomes: dict, discarded: list):
    if isinstance(element, Hwp):
        reg.apply_unitary([(element.path, "v"), (element.path, "h")],
                          hwp(element.theta).matrix)
    elif isinstance(element, PbsSplit):
        v_row = reg.take((element.port, "v"))
        h_row = reg.take((element.port, "h"))
        reg.put((element.v_out, "v"), v_row)
        reg.put((element.h_out, "h"), h_row)
    elif isinstance(element, PbsMerge):
        v_row = reg.take((element.v_in, "v"))
        h_row = reg.take((element.h_in, "h"))
        reg.put((element.out, "v"), v_row)
        reg.put((element.out, "h"), h_row)
    elif isinstance(element, Splitter):
        for pol in ("v", "h"):
            reg.apply_unitary([(element.a, pol), (element.b, pol)], element.matrix)
    elif isinstance(element, Ppc):
        v_row = reg.take((element.port, "v"))
        h_row = reg.take((element.port, "h"))
        reg.put((element.i_out, "v"), h_row)
        reg.put((element.ii_out, "v"), v_row)
    elif isinstance(element, PathToPol):
        i_row = reg.take((element.i_in, "v"))
        ii_row = reg.take((element.ii_in, "v"))
        for path in (element.i_in, element.ii_in):
            if np.any(np.abs(reg.take((path, "h"))) > 0.0):
                raise WiringError(f"path {path} carries h light into a path-to-pol converter")
        reg.put((element.out, "h"), i_row)
        reg.put((element.out, "v"), ii_row)
    elif isinstance(element, Detector):
        rows = outcomes.setdefault(str(element.label), [])
        rows.append(reg.take((element.path, "v")))
        rows.append(reg.take((element.path, "h")))
    elif isinstance(element, Polarizer):
        off_axis = "h" if element.axis == "v" else "v"
        discarded.append(reg.take((element.path, off_axis)))
    else:
        raise ContractError(f"unknown optical element {type(element).__name__}")


def compile_setup(setup: OpticalSetup) -> Povm:
    """Propagate mode amplitudes through the elements and build the POVM.

    Every detector label contributes the quadratic form of its absorbed
    amplitudes.  Raises if light is left unrouted, if a polarizer discards
    amplitude (the setup would be lossy and the outcome family incomplete),
    or if the collected elements fail POVM validation.
    """
    reg = _ModeRegister(setup.input_modes)
    outcomes: dict = {}
    discarded: list = []
    for element in setup.elements:
        _apply_element(reg, element, outcomes, discarded)
    leftover = reg.live_modes()
    if leftover:
        raise WiringError(f"modes never reach a detector: {sorted(leftover)}")
    if any(np.any(np.abs(row) > DEFAULT_TOL) for row in discarded):
        raise WiringError("a polarizer discards amplitude; the setup is lossy")
    labels = tuple(outcomes)
    elements = tuple(
        sum(np.outer(row.conj(), row) for row in rows) for rows in outcomes.values())
    return Povm(labels=labels, elements=elements)


def equivalence(optical: Povm, abstract: Povm) -> float:
    """Largest operator-norm deviation between same-label POVM elements.

    Two POVMs within tolerance of each other produce identical statistics on
    every input state.
    """
    if set(optical.labels) != set(abstract.labels):
        raise ContractError(
            f"outcome labels differ: {sorted(optical.labels)} vs {sorted(abstract.labels)}")
    if optical.dim != abstract.dim:
        raise ContractError(f"dimensions differ: {optical.dim} vs {abstract.dim}")
    deviation = 0.0
    for label in optical.labels:
        diff = optical.element(label) - abstract.element(label)
        deviation = max(deviation, float(np.linalg.norm(diff, 2)))
    return deviation


# ---------------------------------------------------------------------------
# Standard measurement setups
# ---------------------------------------------------------------------------

def polarization_ud_setup(epsilon: float) -> OpticalSetup:
    """Unambiguous discrimination of the two-path polarization markers.

    The entrance splitter separates v and h; an angled plate bleeds the
    v amplitude down to match, its transmitted remainder feeding the
    inconclusive detector; the symmetric splitter then interferes the two
    arms onto the conclusive detectors.
    """
    if not 0.0 < epsilon <= 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    theta = _hwp_for_cos(np.sqrt(epsilon / (1.0 - epsilon)))
    return OpticalSetup(
        name="polarization-ud",
        input_modes=(("in", "v"), ("in", "h")),
        elements=(
            PbsSplit("in", v_out="arm_v", h_out="arm_h"),
            Hwp("arm_h", np.pi / 4.0),
            Hwp("arm_v", theta),
            PbsSplit("arm_v", v_out="arm_v", h_out="drain"),
            Detector("drain", "0"),
            sbs("arm_v", "arm_h"),
            Detector("arm_h", "A"),
            Detector("arm_v", "B"),
        ),
    )


def polarization_mem_setup() -> OpticalSetup:
    """Minimum-error measurement of the two-path polarization markers."""
    return OpticalSetup(
        name="polarization-min-error",
        input_modes=(("in", "v"), ("in", "h")),
        elements=(
            Hwp("in", np.pi / 8.0),
            PbsSplit("in", v_out="port_b", h_out="port_a"),
            Detector("port_a", "A"),
            Detector("port_b", "B"),
        ),
    )


def path_qutrit_ud_setup(epsilon: float) -> OpticalSetup:
    """Unambiguous discrimination of the three-path idler qutrit states.

    A plate-and-splitter stage trims the third path's amplitude, feeding the
    trimmed-off light to the inconclusive detector; a copy of the network's
    preparation stage then maps the three marker states onto single paths.
    """
    if not 0.0 < epsilon <= 1.0 / 3.0:
        raise DomainError(f"epsilon must lie in (0, 1/3], got {epsilon}")
    theta = _hwp_for_cos(np.sqrt(epsilon / (1.0 - 2.0 * epsilon)))
    return OpticalSetup(
        name="path-qutrit-ud",
        input_modes=(("p1", "v"), ("p2", "v"), ("p3", "v")),
        elements=(
            Hwp("p3", theta),
            PbsSplit("p3", v_out="p3", h_out="drain"),
            Detector("drain", "0"),
            Splitter("p2", "p3", OUTER_SPLITTER_BLOCK),
            Splitter("p1", "p2", SBS_MATRIX),
            Detector("p1", "A"),
            Detector("p2", "B"),
            Detector("p3", "C"),
        ),
    )


def path_qutrit_mem_setup() -> OpticalSetup:
    """Minimum-error variant: the trimming stage removed, detectors kept."""
    return OpticalSetup(
        name="path-qutrit-min-error",
        input_modes=(("p1", "v"), ("p2", "v"), ("p3", "v")),
        elements=(
            Splitter("p2", "p3", OUTER_SPLITTER_BLOCK),
            Splitter("p1", "p2", SBS_MATRIX),
            Detector("p1", "A"),
            Detector("p2", "B"),
            Detector("p3", "C"),
        ),
    )


def path_qutrit_exit_setup(epsilon: float) -> OpticalSetup:
    """Orthogonal measurement sorting idlers by the signal's loop passage.

    The first idler path feeds the loop detector directly; the other two are
    folded into a polarization qubit, rotated, and split onto the bypass
    detector and the never-firing third exit.
    """
    if not 0.0 < epsilon <= 1.0 / 3.0:
        raise DomainError(f"epsilon must lie in (0, 1/3], got {epsilon}")
    theta = _hwp_for_cos(np.sqrt(1.0 - 2.0 * epsilon))
    return OpticalSetup(
        name="path-qutrit-exit",
        input_modes=(("p1", "v"), ("p2", "v"), ("p3", "v")),
        elements=(
            Detector("p1", "iii"),
            PathToPol("p2", "p3", "fold"),
            Hwp("fold", theta),
            PbsSplit("fold", v_out="fold_v", h_out="fold_h"),
            Detector("fold_v", "ii"),
            Detector("fold_h", "i"),
        ),
    )


SETUP_BUILDERS = {
    "polarization-ud": polarization_ud_setup,
    "polarization-min-error": lambda epsilon: polarization_mem_setup(),
    "path-qutrit-ud": path_qutrit_ud_setup,
    "path-qutrit-min-error": lambda epsilon: path_qutrit_mem_setup(),
    "path-qutrit-exit": path_qutrit_exit_setup,
}


def build_setup(name: str, epsilon: float) -> OpticalSetup:
    """Look up a named measurement setup at the given marking strength."""
    try:
        builder = SETUP_BUILDERS[name]
    except KeyError:
        raise DomainError(
            f"unknown setup {name!r}; available: {sorted(SETUP_BUILDERS)}") from None
    return builder(epsilon)


# ---------------------------------------------------------------------------
# Photon-pair sources
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairSourceState:
    """Joint idler-signal state emitted by a pair source.

    ``state`` is the normalized joint vector with the idler factor first;
    its Schmidt coefficients follow the marking-strength pattern of the
    selected kind.
    """

    kind: str
    epsilon: float
    state: StateVector
    idler_dim: int
    signal_dim: int

    def coefficient_matrix(self) -> np.ndarray:
        """Joint amplitudes as a (idler_dim, signal_dim) matrix."""
        return self.state.amps.reshape(self.idler_dim, self.signal_dim)

    def schmidt_coefficients(self) -> np.ndarray:
        return np.linalg.svd(self.coefficient_matrix(), compute_uv=False)


def pair_source(kind: str, epsilon: float) -> PairSourceState:
    """Construct the joint idler-signal state of the named source.

    The two-path kind starts from the polarization-entangled pair, rotates
    the signal polarization by an eighth-wave-angled plate, and converts the
    signal polarization into a path qubit.  The three-path kind starts from
    the two-direction pair state, strips one component with a polarizer
    (renormalizing onto the surviving pairs), and converts polarizations to
    paths, yielding matched idler-signal path qutrits.
    """
    if kind == "two-path-polarization":
        if not 0.0 <= epsilon <= 0.5:
            raise DomainError(f"epsilon must lie in [0, 1/2], got {epsilon}")
        v = np.array([1.0, 0.0], dtype=np.complex128)
        h = np.array([0.0, 1.0], dtype=np.complex128)
        joint = (np.sqrt(1.0 - epsilon) * np.kron(v, v)
                 + np.sqrt(epsilon) * np.kron(h, h))
        joint = np.kron(np.eye(2), hwp(np.pi / 8.0).matrix) @ joint
        # Path conversion on the signal: h feeds path i, v feeds path ii.
        convert = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
        joint = np.kron(np.eye(2), convert) @ joint
        return PairSourceState(kind=kind, epsilon=float(epsilon),
                               state=StateVector(joint), idler_dim=2, signal_dim=2)
    if kind == "three-path-entangled":
        if not 0.0 <= epsilon <= 1.0 / 3.0:
            raise DomainError(f"epsilon must lie in [0, 1/3], got {epsilon}")
        v = np.array([1.0, 0.0], dtype=np.complex128)
        h = np.array([0.0, 1.0], dtype=np.complex128)
        k1 = np.array([1.0, 0.0], dtype=np.complex128)
        k2 = np.array([0.0, 1.0], dtype=np.complex128)
        pair = (np.sqrt(epsilon / (1.0 - epsilon)) * np.kron(v, v)
                + np.sqrt((1.0 - 2.0 * epsilon) / (1.0 - epsilon)) * np.kron(h, h))
        joint = (np.kron(pair, k1) + np.kron(pair, k2)) / np.sqrt(2.0)
        # Polarizer in the first direction: remove the h-h component of the
        # first direction pair and renormalize onto the surviving pairs.
        keep = np.ones(8)
        keep[np.ravel_multi_index((1, 1, 0), (2, 2, 2))] = 0.0
        joint = joint * keep
        joint = joint / np.linalg.norm(joint)
        # Matched path-qutrit bases: (v, k1) -> path 1, (v, k2) -> path 2,
        # (h, k2) -> path 3, for idler and signal alike.
        basis_map = {(0, 0): 0, (0, 1): 1, (1, 1): 2}
        qutrit = np.zeros(9, dtype=np.complex128)
        consumed = np.zeros(8, dtype=bool)
        for (i_pol, direction), i_path in basis_map.items():
            for (s_pol, s_direction), s_path in basis_map.items():
                if s_direction != direction:
                    continue  # pair directions are matched
                flat = np.ravel_multi_index((i_pol, s_pol, direction), (2, 2, 2))
                qutrit[3 * i_path + s_path] += joint[flat]
                consumed[flat] = True
        if np.any(np.abs(joint[~consumed]) > DEFAULT_TOL):
            raise ContractError("amplitude left outside the matched-direction basis")
        return PairSourceState(kind=kind, epsilon=float(epsilon),
                               state=StateVector(qutrit), idler_dim=3, signal_dim=3)
    raise DomainError(f"kind must be one of {PAIR_SOURCE_KINDS}, got {kind!r}")


def prepared_joint_state(source: PairSourceState) -> np.ndarray:
    """Push the three-path pair state through the preparation splitters.

    Applying the first two network splitters to the signal factor turns the
    path-entangled source into the checkpoint-stage marker-particle state.
    """
    if source.kind != "three-path-entangled":
        raise DomainError("signal preparation applies to the three-path source")
    u21 = np.kron(np.eye(3), _U_INNER @ _U_OUTER)
    return u21 @ source.state.amps
