"""Two-path interferometer (the internal loop) with a qubit path marker.

The particle enters the loop on the second input port, passes checkpoint A
on path i or checkpoint B on path ii, and recombines at the closing
splitter.  Detector D sits at exit ii, the port that is dark for an
unmarked particle.  The marker qubit amplitudes are ordered (v, h); an
interferometer phase multiplies the path-i amplitude (any equivalent gauge
gives the same exit probabilities).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discrimination import ud2
from .errors import DomainError, SingularPostselectionError
from .qcore import DEFAULT_TOL, DensityOperator, born

LOOP_SPLITTER = np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=np.complex128) / np.sqrt(2.0)

SOURCE_PORT = np.array([0.0, 1.0], dtype=np.complex128)
DARK_PORT = SOURCE_PORT


@dataclass(frozen=True)
class TwoPathModel:
    """Marking strength and interferometer phase of the loop experiment."""

    epsilon: float
    phase: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 0.5:
            raise DomainError(f"epsilon must lie in [0, 1/2], got {self.epsilon}")
        if not np.isfinite(self.phase):
            raise DomainError("phase must be finite")

    @property
    def psi_a(self) -> np.ndarray:
        """Marker state after checkpoint A (path i)."""
        return np.array([np.sqrt(1.0 - self.epsilon), -np.sqrt(self.epsilon)],
                        dtype=np.complex128)

    @property
    def psi_b(self) -> np.ndarray:
        """Marker state after checkpoint B (path ii)."""
        return np.array([np.sqrt(1.0 - self.epsilon), np.sqrt(self.epsilon)],
                        dtype=np.complex128)


def exit_marker_vectors(model: TwoPathModel) -> dict:
    """Unnormalized marker vectors attached to the two exits.

    Squared norms are the exit probabilities.  The phase rides on the path-i
    amplitude between the checkpoints and the closing splitter.
    """
    after_checkpoints = np.stack([
        np.exp(1j * model.phase) * model.psi_a / np.sqrt(2.0),
        model.psi_b / np.sqrt(2.0),
    ])  # row p = marker vector on path p
    exits = LOOP_SPLITTER @ after_checkpoints
    return {"i": exits[0], "ii": exits[1]}


def exit_probabilities(model: TwoPathModel) -> dict:
    vectors = exit_marker_vectors(model)
    return {label: float(np.real(np.vdot(vec, vec))) for label, vec in vectors.items()}


@dataclass(frozen=True)
class TwoPathConditional:
    """Detection probability and exit-conditioned marker states."""

    p_detect: float
    rho_fin: DensityOperator        # dark port (exit ii); None when dark
    rho_fin_prime: DensityOperator  # bright port (exit i)


def detection_and_states(model: TwoPathModel) -> TwoPathConditional:
    """Dark-port probability and the exit-conditioned marker qubit states.

    At zero phase the dark port fires with probability equal to the marking
    strength and leaves the marker purely horizontal; the bright port leaves
    it purely vertical.  At zero marking the dark port stays dark and
    ``rho_fin`` is None.
    """
    vectors = exit_marker_vectors(model)
    probs = exit_probabilities(model)
    p_detect = probs["ii"]

    def conditioned(label):
        if probs[label] <= DEFAULT_TOL:
            return None
        vec = vectors[label] / np.sqrt(probs[label])
        return DensityOperator(np.outer(vec, vec.conj()))

    return TwoPathConditional(p_detect=p_detect, rho_fin=conditioned("ii"),
                              rho_fin_prime=conditioned("i"))


@dataclass(frozen=True)
class FringeScan:
    """Dark-port probability over one phase period and the fitted visibility."""

    phases: np.ndarray
    p_ii: np.ndarray
    visibility: float


def fringe_scan(epsilon: float, n_points: int = 64) -> FringeScan:
    """Scan the interferometer phase over a full period.

    The visibility is extracted by a least-squares fit of the fringe to
    ``a + c cos(phase) + s sin(phase)`` and equals 1 - 2 epsilon.
    """
    if n_points < 8:
        raise DomainError(f"need at least 8 phase points, got {n_points}")
    phases = np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)
    p_ii = np.array([exit_probabilities(TwoPathModel(epsilon, phase))["ii"]
                     for phase in phases])
    design = np.column_stack([np.ones_like(phases), np.cos(phases), np.sin(phases)])
    mean, cos_amp, sin_amp = np.linalg.lstsq(design, p_ii, rcond=None)[0]
    visibility = float(np.hypot(cos_amp, sin_amp) / mean)
    return FringeScan(phases=phases, p_ii=p_ii, visibility=visibility)


def twopath_weak_values(phase: float) -> tuple:
    """Weak values of the two path projectors for dark-port post-selection.

    Both real parts are 1/2; the imaginary parts are +-cot(phase/2)/2 and
    diverge as the phase closes.  At zero phase the post-selection amplitude
    vanishes and the weak values are undefined.
    """
    fwd = LOOP_SPLITTER @ SOURCE_PORT
    fwd = fwd * np.array([np.exp(1j * phase), 1.0])
    bwd = (DARK_PORT @ LOOP_SPLITTER).conj()
    amp = np.vdot(bwd, fwd)
    if abs(amp) <= DEFAULT_TOL:
        raise SingularPostselectionError(
            "weak values are undefined without an interferometer phase")
    values = bwd.conj() * fwd / amp
    return complex(values[0]), complex(values[1])


def whole_ensemble_tally(epsilon: float) -> dict:
    """Fractions of all particles with known or unknowable paths.

    A fraction epsilon each surely passed checkpoint A or B (identified by
    the conclusive discrimination outcomes, half at each exit); the rest
    have unknowable paths, interfere fully, and all leave by exit i.
    """
    if epsilon == 0.0:
        return {"knownA": 0.0, "knownB": 0.0, "unknowable": 1.0}
    model = TwoPathModel(epsilon)
    conditional = detection_and_states(model)
    povm = ud2(epsilon).povm
    dark = born(conditional.rho_fin, povm)
    bright = born(conditional.rho_fin_prime, povm)
    weight_dark = conditional.p_detect
    weight_bright = 1.0 - weight_dark
    tally = {}
    for label, key in (("A", "knownA"), ("B", "knownB")):
        tally[key] = weight_dark * dark[label] + weight_bright * bright[label]
    tally["unknowable"] = weight_dark * dark["0"] + weight_bright * bright["0"]
    return tally
