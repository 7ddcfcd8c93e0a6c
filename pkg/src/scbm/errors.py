"""Exception hierarchy shared across the pipeline."""


class ScbmError(Exception):
    """Base class for all pipeline errors."""


class ParseError(ScbmError):
    def __init__(self, path, line, reason):
        self.path = path
        self.line = line
        self.reason = reason
        super().__init__(f"{path}:{line}: {reason}")


class InvariantError(ScbmError):
    pass


class UnknownSegment(ScbmError):
    pass


class UnknownSubject(ScbmError):
    pass


class UnknownScenario(ScbmError):
    pass


class MissingClip(ScbmError):
    pass


class DimMismatch(ScbmError):
    pass


class FormatError(ScbmError):
    def __init__(self, offset, reason):
        self.offset = offset
        self.reason = reason
        super().__init__(f"offset {offset}: {reason}")


class ChecksumMismatch(ScbmError):
    pass


class NonFinite(ScbmError):
    pass


class TooFewRows(ScbmError):
    pass


class TooFewClips(ScbmError):
    pass


class EmptyClass(ScbmError):
    pass


class SingleClass(ScbmError):
    pass


class LengthMismatch(ScbmError):
    pass


class NotEnoughSubjects(ScbmError):
    pass


class EmptyTest(ScbmError):
    pass


class ProtocolMismatch(ScbmError):
    pass


class SpecInvalid(ScbmError):
    pass


class ConfigError(ScbmError):
    pass
