"""Exception types shared across the package."""


class FogplanError(Exception):
    """Base class for all package-specific errors."""


class StructureError(FogplanError):
    """Malformed input container: wrong dimensions, missing fields, bad keys."""


class ParameterError(FogplanError):
    """A scalar argument is outside its admissible range."""


class DegenerateInputError(FogplanError):
    """An operation is undefined for this input (zero totals, no edges, ...)."""


class ConfigError(FogplanError):
    """A scenario / CLI configuration cannot be interpreted."""


class EnumerationCapError(FogplanError):
    """Exhaustive search refused: the candidate count exceeds the configured cap."""

    def __init__(self, required: int, cap: int):
        self.required = required
        self.cap = cap
        super().__init__(
            f"exhaustive search would enumerate {required} allocations, cap is {cap}"
        )
