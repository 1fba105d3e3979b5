"""Symmetric marker-state family and pre/post-selected sub-ensembles.

With trivial E and F interactions the marker state after a passage lives in
the span of three vectors: one per marked checkpoint.  This module fixes an
explicit three-component gauge for that span (any choice unitarily
equivalent to the same Gram matrix is physically identical), builds the
entangled marker-particle states at each stage of the network, and sorts the
detected particles into the sub-ensembles selected by the unambiguous
path-discrimination outcomes.

Square-bracket marker columns and round-bracket path columns are distinct
spaces here: marker vectors appear as ``psi_*``/``mu_*`` arrays of the
family, path columns are returned as :class:`~weakpathsim.qcore.StateVector`
values whose squared norm is the sub-ensemble weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import ContractError, DomainError
from .interferometer import _U_INNER, _U_OUTER
from .qcore import DensityOperator, StateVector

UD_OUTCOMES = ("A", "B", "C", "0")
STAGES = ("checkpoints", "after_bs3", "exit")


@dataclass(frozen=True)
class MarkerFamily:
    """Marker states for equal-strength marking at checkpoints A, B, C.

    ``psi_a``, ``psi_b``, ``psi_c`` are the marker columns after a passage
    through the respective checkpoint; their Gram matrix has unit diagonal
    and off-diagonal overlaps ``1 - 3 epsilon``.  ``psi`` is the symmetric
    axis of the family (the common column in the no-marking limit).
    """

    epsilon: float
    psi: np.ndarray
    psi_a: np.ndarray
    psi_b: np.ndarray
    psi_c: np.ndarray

    @property
    def overlap(self) -> float:
        """Pairwise overlap of distinct marker states."""
        return 1.0 - 3.0 * self.epsilon

    def columns(self) -> np.ndarray:
        """3x3 array whose columns are psi_a, psi_b, psi_c."""
        return np.column_stack([self.psi_a, self.psi_b, self.psi_c])

    def gram(self) -> np.ndarray:
        cols = self.columns()
        return cols.conj().T @ cols


def build_family(epsilon: float) -> MarkerFamily:
    """Construct the marker family at marking strength ``epsilon``.

    The returned columns fix one concrete gauge; tests and downstream code
    should rely on Gram data, not on raw amplitudes.
    """
    if not 0.0 <= epsilon <= 1.0 / 3.0:
        raise DomainError(f"epsilon must lie in [0, 1/3], got {epsilon}")
    half = np.sqrt(epsilon / 2.0)
    rest = np.sqrt(1.0 - 2.0 * epsilon)
    psi_a = np.array([np.sqrt(3.0 * epsilon / 2.0), -half, rest], dtype=np.complex128)
    psi_b = np.array([-np.sqrt(3.0 * epsilon / 2.0), -half, rest], dtype=np.complex128)
    psi_c = np.array([0.0, np.sqrt(2.0 * epsilon), rest], dtype=np.complex128)
    psi = np.array([0.0, 0.0, 1.0], dtype=np.complex128)
    return MarkerFamily(epsilon=float(epsilon), psi=psi,
                        psi_a=psi_a, psi_b=psi_b, psi_c=psi_c)


def pointer_product_family(epsilon: float) -> dict:
    """Three-pointer tensor-product form of the family (oracle constructor).

    One two-level pointer per checkpoint, all starting in the same reference
    state; a passage kicks the local pointer.  Unitarily equivalent to
    :func:`build_family` (identical Gram matrix), but eight-dimensional.
    """
    if not 0.0 <= epsilon <= 1.0 / 3.0:
        raise DomainError(f"epsilon must lie in [0, 1/3], got {epsilon}")
    chi0 = np.array([1.0, 0.0], dtype=np.complex128)
    chi = np.array([np.sqrt(1.0 - 3.0 * epsilon), np.sqrt(3.0 * epsilon)],
                   dtype=np.complex128)
    kron = lambda *vs: reduce(np.kron, vs)
    return {
        "psi": kron(chi0, chi0, chi0),
        "A": kron(chi, chi0, chi0),
        "B": kron(chi0, chi, chi0),
        "C": kron(chi0, chi0, chi),
    }


def ud_columns(family: MarkerFamily) -> dict:
    """Dual columns of the family used for unambiguous discrimination.

    The conclusive column for outcome ``a`` is orthogonal to both other
    marker states and overlaps its own with probability ``3 epsilon``; the
    inconclusive column lies along the symmetric axis.
    """
    eps = family.epsilon
    tail = np.sqrt(eps / (3.0 - 6.0 * eps))
    mu_a = np.array([np.sqrt(0.5), -np.sqrt(1.0 / 6.0), tail], dtype=np.complex128)
    mu_b = np.array([-np.sqrt(0.5), -np.sqrt(1.0 / 6.0), tail], dtype=np.complex128)
    mu_c = np.array([0.0, np.sqrt(2.0 / 3.0), tail], dtype=np.complex128)
    phi_0 = np.array([0.0, 0.0, np.sqrt((1.0 - 3.0 * eps) / (1.0 - 2.0 * eps))],
                     dtype=np.complex128)
    return {"A": mu_a, "B": mu_b, "C": mu_c, "0": phi_0}


def tensor_span_isometry(family: MarkerFamily) -> np.ndarray:
    """Isometry mapping the three-component gauge into the five-qubit model.

    Sends each family column to the corresponding kicked-pointer product
    state (loop-gate pointers idle).  Because both representations share one
    Gram matrix the map is an isometry; it lets closed-form span results be
    compared against brute-force tensor-space evolution.
    """
    if family.epsilon <= 0.0:
        raise DomainError("span embedding requires epsilon > 0 (columns must span)")
    pointers = pointer_product_family(family.epsilon)
    ground = np.array([1.0, 0.0], dtype=np.complex128)
    idle = np.kron(ground, ground)
    targets = np.column_stack([np.kron(pointers[k], idle) for k in ("A", "B", "C")])
    return targets @ np.linalg.inv(family.columns())


@dataclass(frozen=True)
class JointState:
    """Marker-particle entangled state, marker factor first.

    Amplitude layout: ``amps[m * path_dim + p]`` for marker index ``m`` and
    path index ``p``.  The squared norm is the statistical weight of the
    described ensemble.
    """

    amps: np.ndarray
    stage: str
    marker_dim: int = 3
    path_dim: int = 3

    @property
    def weight(self) -> float:
        return float(np.real(np.vdot(self.amps, self.amps)))

    def marker_block(self, path: int) -> np.ndarray:
        """Marker vector attached to one path component."""
        return self.amps.reshape(self.marker_dim, self.path_dim)[:, path]

    def path_density(self) -> DensityOperator:
        """Reduced path state (marker traced out)."""
        block = self.amps.reshape(self.marker_dim, self.path_dim)
        return DensityOperator(block.T @ block.conj())

    def marker_density(self) -> DensityOperator:
        """Reduced marker state (path traced out)."""
        block = self.amps.reshape(self.marker_dim, self.path_dim)
        return DensityOperator(block @ block.conj().T)


def _path_propagator(stage: str) -> np.ndarray:
    if stage == "checkpoints":
        return np.eye(3, dtype=np.complex128)
    if stage == "after_bs3":
        return _U_INNER
    if stage == "exit":
        return _U_OUTER @ _U_INNER
    raise DomainError(f"stage must be one of {STAGES}, got {stage!r}")


def joint_state(family: MarkerFamily, stage: str = "checkpoints") -> JointState:
    """Entangled marker-particle wave function at the requested stage.

    At the checkpoints each path carries its own marker column with weight
    1/3; the later stages apply the remaining beam splitters to the path
    factor only.
    """
    prop = _path_propagator(stage)
    block = family.columns() / np.sqrt(3.0)    # block[m, p] = psi_p[m]/sqrt(3)
    evolved = block @ prop.T                   # path factor evolves by prop
    return JointState(amps=evolved.reshape(-1), stage=stage)


def rho_fin(family: MarkerFamily) -> DensityOperator:
    """Normalized final marker state conditioned on a detector click."""
    vec = family.psi_c + family.psi_b - family.psi_a
    vec = vec / np.sqrt(1.0 + 6.0 * family.epsilon)
    return DensityOperator(np.outer(vec, vec.conj()))


def subensemble(family: MarkerFamily, outcome: str, stage: str = "checkpoints") -> StateVector:
    """Weighted path column of one discrimination sub-ensemble.

    Contracts the marker factor of the stage's joint state with the dual
    column of ``outcome``.  At the ``after_bs3`` stage the path-i component
    is projected out (only the components heading for the final splitter
    matter for particles that will reach the detector), so the four
    sub-ensemble weights there sum to the surviving ensemble weight.
    """
    outcome = str(outcome)
    if outcome not in UD_OUTCOMES:
        raise ContractError(f"outcome must be one of {UD_OUTCOMES}, got {outcome!r}")
    joint = joint_state(family, stage)
    mu = ud_columns(family)[outcome]
    block = joint.amps.reshape(3, 3)
    column = mu.conj() @ block
    if stage == "after_bs3":
        column = column.copy()
        column[0] = 0.0
    return StateVector(column)
