"""Exception hierarchy shared across the package."""


class GqftError(Exception):
    """Base class for all package errors."""


class EncodingError(GqftError, ValueError):
    """An element or document does not follow the expected encoding."""


class DomainError(GqftError, ValueError):
    """An argument lies outside the subgroup or set it must belong to."""


class CapabilityError(GqftError):
    """The requested family, plan or size is not supported."""


class ConstructionError(GqftError):
    """Internal consistency check failed while building a structure."""


class CertificationError(ConstructionError):
    """A Schur block certificate could not be established."""


class SynthesisError(GqftError):
    """Circuit synthesis failed."""


class PlanError(SynthesisError):
    """A stage strategy was requested where its preconditions do not hold."""


class ValidationError(GqftError):
    """A circuit failed validation."""


class ExecutionError(GqftError):
    """The simulator cannot execute a circuit on a state."""


class NormalizationError(GqftError, ValueError):
    """An input function is not unit-norm."""


class ParseError(GqftError, ValueError):
    """A serialized document could not be parsed."""
