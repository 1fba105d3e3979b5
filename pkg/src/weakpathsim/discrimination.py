"""Measurements that read out the path marker.

Four measurement families: unambiguous discrimination of the three-path
marker states, the orthogonal measurement sorting detector-bound particles
by loop passage, unambiguous discrimination of the two-path marker qubit,
and the two-outcome minimum-error measurement of that qubit.  Construction
is rejected at zero marking strength, where the marker states coincide and
discrimination degenerates; the closed-form outcome rates remain available
as limits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import marker
from .errors import DegenerateFamilyError, DomainError
from .qcore import Povm, born, projector

TOPOLOGIES = ("three-path", "two-path")


@dataclass(frozen=True)
class UdPovm3:
    """Unambiguous discrimination of the three marker states.

    Conclusive outcomes A, B, C identify the checkpoint with zero error;
    outcome 0 is inconclusive.
    """

    epsilon: float
    povm: Povm
    columns: dict

    def element(self, label) -> np.ndarray:
        return self.povm.element(label)


@dataclass(frozen=True)
class ExitPovm:
    """Orthogonal measurement distinguishing loop exit from bypass.

    The three projectors form an orthonormal basis; on detector-conditioned
    states outcome ``i`` never fires, outcome ``ii`` flags the bypass
    checkpoint and outcome ``iii`` the internal loop.
    """

    epsilon: float
    povm: Povm
    columns: dict

    def element(self, label) -> np.ndarray:
        return self.povm.element(label)


@dataclass(frozen=True)
class UdPovm2:
    """Unambiguous discrimination of the two-path marker qubit states."""

    epsilon: float
    povm: Povm

    def element(self, label) -> np.ndarray:
        return self.povm.element(label)


def ud3(epsilon: float) -> UdPovm3:
    """Unambiguous discrimination of the symmetric three-state family.

    Each conclusive outcome succeeds with probability ``3 epsilon`` on its
    own state and never fires on the other two; the inconclusive rate
    ``1 - 3 epsilon`` saturates the optimum for this family.
    """
    if epsilon > 1.0 / 3.0:
        raise DomainError(f"epsilon must lie in (0, 1/3], got {epsilon}")
    if epsilon <= 0.0:
        raise DegenerateFamilyError(
            "marker states coincide at epsilon = 0; nothing to discriminate")
    family = marker.build_family(epsilon)
    cols = marker.ud_columns(family)
    elements = [projector(cols[label]) for label in marker.UD_OUTCOMES]
    povm = Povm(labels=marker.UD_OUTCOMES, elements=tuple(elements))
    return UdPovm3(epsilon=float(epsilon), povm=povm, columns=cols)


def ud3_on_postselected(epsilon: float) -> dict:
    """Outcome probabilities of the UD measurement on detector-conditioned
    particles: the three conclusive outcomes are equally likely."""
    family = marker.build_family(epsilon)
    return born(marker.rho_fin(family), ud3(epsilon).povm)


def exit_povm(epsilon: float) -> ExitPovm:
    """Orthogonal measurement separating bypass and loop contributions.

    Outcome ``ii`` projects on the bypass marker state, outcome ``iii`` on
    the normalized loop difference state, and outcome ``i`` on the remaining
    direction, which is orthogonal to every detector-bound marker state.
    """
    if epsilon > 1.0 / 3.0:
        raise DomainError(f"epsilon must lie in (0, 1/3], got {epsilon}")
    if epsilon <= 0.0:
        raise DegenerateFamilyError(
            "loop difference state vanishes at epsilon = 0; measurement undefined")
    family = marker.build_family(epsilon)
    phi_i = np.array([0.0, -np.sqrt(1.0 - 2.0 * epsilon), np.sqrt(2.0 * epsilon)],
                     dtype=np.complex128)
    phi_ii = family.psi_c.copy()
    phi_iii = (family.psi_a - family.psi_b) / np.sqrt(6.0 * epsilon)
    cols = {"i": phi_i, "ii": phi_ii, "iii": phi_iii}
    povm = Povm(labels=("i", "ii", "iii"),
                elements=tuple(projector(cols[k]) for k in ("i", "ii", "iii")))
    return ExitPovm(epsilon=float(epsilon), povm=povm, columns=cols)


def exit_priors(epsilon: float) -> dict:
    """A-priori weights of the three exits when the final splitter is absent."""
    if not 0.0 <= epsilon <= 1.0 / 3.0:
        raise DomainError(f"epsilon must lie in [0, 1/3], got {epsilon}")
    return {"i": (2.0 - 3.0 * epsilon) / 3.0, "ii": 1.0 / 3.0, "iii": float(epsilon)}


def ud2(epsilon: float) -> UdPovm2:
    """Unambiguous discrimination of the two-path marker qubit.

    On the dark-port-conditioned marker state the inconclusive outcome never
    fires and the conclusive outcomes are equally likely; on the bright-port
    state conclusive outcomes occur with probability ``eps/(2(1-eps))`` each.
    """
    if epsilon > 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    if epsilon <= 0.0:
        raise DegenerateFamilyError(
            "marker states coincide at epsilon = 0; nothing to discriminate")
    ratio = epsilon / (1.0 - epsilon)
    root = np.sqrt(ratio)
    pi_a = 0.5 * np.array([[ratio, -root], [-root, 1.0]], dtype=np.complex128)
    pi_b = 0.5 * np.array([[ratio, root], [root, 1.0]], dtype=np.complex128)
    pi_0 = np.array([[(1.0 - 2.0 * epsilon) / (1.0 - epsilon), 0.0], [0.0, 0.0]],
                    dtype=np.complex128)
    povm = Povm(labels=("A", "B", "0"), elements=(pi_a, pi_b, pi_0))
    return UdPovm2(epsilon=float(epsilon), povm=povm)


def mem2() -> Povm:
    """Minimum-error measurement for the two-path marker qubit.

    The optimal projectors for the symmetric qubit pair do not depend on the
    marking strength: they project on the diagonal polarization directions.
    """
    pi_a = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]], dtype=np.complex128)
    pi_b = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]], dtype=np.complex128)
    return Povm(labels=("A", "B"), elements=(pi_a, pi_b))


def min_error_success(epsilon: float, topology: str = "three-path") -> float:
    """Best achievable guessing rate for equally likely marker states.

    The three-path value refers to the symmetric three-state family; the
    two-path value is attained by :func:`mem2` and also exposed through the
    compiled minimum-error optical setup.
    """
    if topology == "three-path":
        if not 0.0 <= epsilon <= 1.0 / 3.0:
            raise DomainError(f"epsilon must lie in [0, 1/3], got {epsilon}")
        return float((np.sqrt(1.0 - 2.0 * epsilon) + 2.0 * np.sqrt(epsilon)) ** 2 / 3.0)
    if topology == "two-path":
        if not 0.0 <= epsilon <= 0.5:
            raise DomainError(f"epsilon must lie in [0, 1/2], got {epsilon}")
        return float(0.5 + np.sqrt(epsilon * (1.0 - epsilon)))
    raise DomainError(f"topology must be one of {TOPOLOGIES}, got {topology!r}")


def embedded_ud3(epsilon: float) -> tuple:
    """UD POVM lifted to the five-qubit marker space, plus the isometry.

    Marker directions outside the span of the marked family carry no path
    information, so their weight joins the inconclusive outcome; the lifted
    element family is again a valid POVM.  Intended for brute-force checks
    against full tensor-space evolution.
    """
    ud = ud3(epsilon)
    family = marker.build_family(epsilon)
    iso = marker.tensor_span_isometry(family)
    dim = iso.shape[0]
    lifted = [iso @ ud.element(label) @ iso.conj().T for label in ud.povm.labels]
    lifted[-1] = lifted[-1] + np.eye(dim) - iso @ iso.conj().T
    povm = Povm(labels=ud.povm.labels, elements=tuple(lifted))
    return povm, iso
