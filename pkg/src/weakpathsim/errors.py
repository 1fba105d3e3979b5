"""Exception hierarchy shared by all weakpathsim modules."""


class WeakPathSimError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(WeakPathSimError, ValueError):
    """Operand dimensions are inconsistent (tensor factors, matrix shapes)."""


class CapacityError(WeakPathSimError, ValueError):
    """A tensor-product dimension exceeds the configured cap."""


class ContractError(WeakPathSimError, ValueError):
    """A constructed object violates its algebraic contract.

    Raised for non-unitary operators, non-positive or incomplete POVMs,
    mismatched outcome label sets, and similar validation failures.
    """


class DomainError(WeakPathSimError, ValueError):
    """A parameter lies outside its admissible range."""


class DegenerateFamilyError(DomainError):
    """The marker states coincide, so unambiguous discrimination is impossible."""


class SingularPostselectionError(WeakPathSimError, ZeroDivisionError):
    """Post-selection amplitude vanishes; the requested weak value is undefined."""


class WiringError(WeakPathSimError, ValueError):
    """An optical setup leaves a mode unrouted or routes two modes into one."""


class ScenarioError(WeakPathSimError, ValueError):
    """A scenario file or CLI invocation is malformed or inconsistent."""
