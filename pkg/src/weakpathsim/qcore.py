"""Dimension-generic complex linear algebra and quantum-state primitives.

All state spaces in this package are small (dimension <= ~30), so everything
is dense ``complex128``.  Values are immutable after construction and all
operations are pure functions, safe for concurrent use.

Unnormalized state vectors are first-class citizens: a vector's squared norm
is its statistical weight, so sub-ensemble bookkeeping can keep overall
amplitude factors instead of renormalizing at every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import CapacityError, ContractError, ShapeError

#: Default tolerance for algebraic identities (double precision leaves
#: roughly 1e-15 of headroom on these small problems).
DEFAULT_TOL = 1e-12

#: Largest admissible dimension of a tensor-product result.
TENSOR_DIM_CAP = 4096


def _as_complex_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError(f"expected a nonempty 1-d amplitude array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ContractError("amplitudes must be finite (no NaN/inf)")
    return arr


def _as_complex_matrix(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ShapeError(f"expected a nonempty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ContractError("matrix entries must be finite (no NaN/inf)")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def is_hermitian(matrix: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.max(np.abs(matrix - matrix.conj().T)) <= tol)


def min_eigenvalue(matrix: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of ``matrix``.

    Hermitizing first keeps rounding noise from producing spurious complex
    eigenvalues.
    """
    herm = 0.5 * (matrix + matrix.conj().T)
    return float(np.linalg.eigvalsh(herm)[0])


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude column, possibly unnormalized.

    The squared norm is the statistical weight of the ensemble the vector
    describes; ``normalized`` reports whether that weight is 1 within ``tol``.
    """

    amps: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "amps", _freeze(_as_complex_vector(self.amps)))

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    @property
    def weight(self) -> float:
        return float(np.real(np.vdot(self.amps, self.amps)))

    @property
    def normalized(self) -> bool:
        return abs(self.weight - 1.0) <= self.tol

    def unit(self) -> "StateVector":
        """Return the normalized copy of this vector."""
        w = self.weight
        if w <= self.tol:
            raise ContractError("cannot normalize a (near-)zero vector")
        return StateVector(self.amps / np.sqrt(w), tol=self.tol)

    def density(self) -> "DensityOperator":
        """Rank-one density operator |v><v| (trace = statistical weight)."""
        return DensityOperator(np.outer(self.amps, self.amps.conj()), tol=self.tol)


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive-semidefinite operator with positive trace."""

    matrix: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        mat = _as_complex_matrix(self.matrix)
        if not is_hermitian(mat, self.tol):
            raise ContractError("density operator must be Hermitian")
        if min_eigenvalue(mat) < -self.tol:
            raise ContractError("density operator must be positive semidefinite")
        if np.real(np.trace(mat)) <= 0.0:
            raise ContractError("density operator must have positive trace")
        object.__setattr__(self, "matrix", _freeze(mat))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def unit(self) -> "DensityOperator":
        return DensityOperator(self.matrix / self.trace, tol=self.tol)


@dataclass(frozen=True)
class UnitaryOperator:
    """Square matrix validated against U^dagger U = 1."""

    matrix: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        mat = _as_complex_matrix(self.matrix)
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if dev > self.tol:
            raise ContractError(f"operator is not unitary (max |U^dag U - 1| = {dev:.3e})")
        object.__setattr__(self, "matrix", _freeze(mat))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Povm:
    """Finite labeled family of positive operators summing to the identity."""

    labels: tuple
    elements: tuple = field(repr=False)
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        if len(labels) != len(set(labels)):
            raise ContractError("POVM outcome labels must be unique")
        elements = tuple(_freeze(_as_complex_matrix(el)) for el in self.elements)
        if len(labels) != len(elements):
            raise ContractError("one POVM element per label required")
        if not elements:
            raise ContractError("POVM must have at least one outcome")
        dim = elements[0].shape[0]
        total = np.zeros((dim, dim), dtype=np.complex128)
        for label, el in zip(labels, elements):
            if el.shape != (dim, dim):
                raise ShapeError("all POVM elements must share one dimension")
            if not is_hermitian(el, self.tol):
                raise ContractError(f"POVM element {label!r} is not Hermitian")
            if min_eigenvalue(el) < -self.tol:
                raise ContractError(f"POVM element {label!r} is not positive semidefinite")
            total += el
        if np.max(np.abs(total - np.eye(dim))) > self.tol:
            raise ContractError("POVM elements do not sum to the identity")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "elements", elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def element(self, label) -> np.ndarray:
        return self.elements[self.labels.index(str(label))]


State = Union[StateVector, DensityOperator]


def _state_matrix(state: State) -> np.ndarray:
    if isinstance(state, StateVector):
        return np.outer(state.amps, state.amps.conj())
    if isinstance(state, DensityOperator):
        return state.matrix
    raise ContractError(f"expected StateVector or DensityOperator, got {type(state).__name__}")


def tensor_product(a: StateVector, b: StateVector, dim_cap: int = TENSOR_DIM_CAP) -> StateVector:
    """Kronecker product of two state vectors; norms multiply."""
    if a.dim * b.dim > dim_cap:
        raise CapacityError(f"tensor product dimension {a.dim * b.dim} exceeds cap {dim_cap}")
    return StateVector(np.kron(a.amps, b.amps), tol=max(a.tol, b.tol))


def partial_trace(rho: DensityOperator, dims: Sequence[int], keep: int) -> DensityOperator:
    """Trace out every tensor factor except ``dims[keep]``; trace is preserved."""
    dims = [int(d) for d in dims]
    if any(d <= 0 for d in dims):
        raise ShapeError("factor dimensions must be positive")
    if int(np.prod(dims)) != rho.dim:
        raise ShapeError(f"product of factor dims {dims} != operator dim {rho.dim}")
    if not 0 <= keep < len(dims):
        raise ShapeError(f"keep index {keep} out of range for {len(dims)} factors")
    n = len(dims)
    tensor = rho.matrix.reshape(dims + dims)
    # Contract row/column indices of every traced factor pairwise.
    for factor in range(n - 1, -1, -1):
        if factor == keep:
            continue
        tensor = np.trace(tensor, axis1=factor, axis2=factor + tensor.ndim // 2)
    return DensityOperator(tensor, tol=rho.tol)


def born(state: State, povm: Povm) -> dict:
    """Born-rule probabilities for every POVM outcome.

    Tiny negative values from rounding are clamped to zero; the probabilities
    sum to the trace (statistical weight) of ``state``.
    """
    rho = _state_matrix(state)
    if rho.shape[0] != povm.dim:
        raise ShapeError(f"state dimension {rho.shape[0]} != POVM dimension {povm.dim}")
    probs = {}
    for label, el in zip(povm.labels, povm.elements):
        p = float(np.real(np.trace(el @ rho)))
        if p < -povm.tol:
            raise ContractError(f"outcome {label!r} has probability {p} < 0")
        probs[label] = max(p, 0.0)
    return probs


def apply_unitary(u: UnitaryOperator, state: State) -> State:
    """Evolve a vector or density operator; norm respectively trace is preserved."""
    if isinstance(state, StateVector):
        if state.dim != u.dim:
            raise ShapeError(f"state dimension {state.dim} != operator dimension {u.dim}")
        return StateVector(u.matrix @ state.amps, tol=state.tol)
    if isinstance(state, DensityOperator):
        if state.dim != u.dim:
            raise ShapeError(f"state dimension {state.dim} != operator dimension {u.dim}")
        return DensityOperator(u.matrix @ state.matrix @ u.matrix.conj().T, tol=state.tol)
    raise ContractError(f"expected StateVector or DensityOperator, got {type(state).__name__}")


def projector(amps) -> np.ndarray:
    """Rank-one projector-like outer product |v><v| as a plain array."""
    vec = _as_complex_vector(amps)
    return np.outer(vec, vec.conj())


def expectation(operator: np.ndarray, rho: np.ndarray) -> complex:
    """tr(operator @ rho) for plain arrays."""
    return complex(np.trace(np.asarray(operator) @ np.asarray(rho)))
