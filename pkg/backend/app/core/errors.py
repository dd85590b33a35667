from typing import Optional


class SegBufError(Exception):
    """Base class for all errors raised by the toolkit."""


class ConfigError(SegBufError, ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ConfigSyntaxError(ConfigError):
    pass


class TraceError(SegBufError, ValueError):
    """Trace does not fit the config or the operation."""


class TraceFormatError(TraceError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DecisionLogError(SegBufError, ValueError):
    pass


class DiligenceViolation(SegBufError):
    def __init__(self, step: int, message: str):
        self.step = step
        super().__init__(f"step {step}: {message}")


class TraceNotDrainedError(TraceError):
    pass


class OracleLimitError(SegBufError):
    def __init__(self, message: str, state_events: Optional[int] = None):
        self.state_events = state_events
        super().__init__(message)


class AdversaryError(SegBufError):
    pass


class PolicyNameError(SegBufError, ValueError):
    pass


class SuiteError(SegBufError, ValueError):
    pass
