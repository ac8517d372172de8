"""
Error types shared across the package
"""


class ContractViolation(ValueError):
    """A documented precondition of an operation was not met"""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration, trace or input file"""

    def __init__(self, message: str, field: str = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
