"""Exception and warning types used across the package."""


class AtomChainError(Exception):
    """Base class for all package errors."""


class SelfInteractionError(AtomChainError):
    """Green tensor requested at coincident source and observation points."""


class DomainError(AtomChainError):
    """Argument outside the mathematical domain of a special function."""


class DiagonalizationError(AtomChainError):
    """Eigensolver failed to converge."""


class DegenerateAnsatzError(AtomChainError):
    """Antisymmetric pair ansatz requested with two identical mode labels."""


class BasisMismatchError(AtomChainError):
    """Operands were built on different truncated bases."""


class ConfigError(AtomChainError):
    """Invalid run configuration (bad value, unknown key, step-size violation)."""


class StabilityError(AtomChainError):
    """Integration left the physically allowed region (trace drift)."""


class ZeroFieldError(AtomChainError):
    """Far-field pattern requested for an identically vanishing source."""


class InconclusiveWindowError(AtomChainError):
    """Observation window too short or empty for the requested analysis."""


class AmbiguousLabelWarning(UserWarning):
    """Pair-label assignment fell below the trusted overlap threshold."""
