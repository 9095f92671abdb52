# meqc/errors.py - Exception hierarchy shared by every module


class MeqcError(Exception):
    """Base class for all errors raised by the package."""


class InvalidConfigError(MeqcError, ValueError):
    pass


class DomainError(MeqcError, ValueError):
    pass


class UnsupportedLevelError(MeqcError, ValueError):
    pass


class UnknownServerError(MeqcError, LookupError):
    pass


class InfeasibleLinkError(MeqcError, ValueError):
    pass


class ContractViolationError(MeqcError, ValueError):
    pass


class InstanceTooLargeError(MeqcError, RuntimeError):
    pass


class TrainingError(MeqcError, RuntimeError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigParseError(InvalidConfigError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        location = ""
        if key:
            location += f" [key: {key}]"
        if line is not None:
            location += f" [line {line}]"
        super().__init__(f"{message}{location}")
        self.key = key
        self.line = line
