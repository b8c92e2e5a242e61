"""Exception types shared across the pipeline.

Every error raised by library code derives from StorymatchError so the CLI
can turn any of them into a single machine-parsable line and a nonzero exit.
"""


class StorymatchError(Exception):
    pass


class UnknownLabel(StorymatchError):
    pass


class MalformedRule(StorymatchError):
    pass


class LabelerUnavailable(StorymatchError):
    pass


class ProtocolViolation(StorymatchError):
    pass


class MissingPassage(StorymatchError):
    pass


class LabelerTimeout(StorymatchError):
    pass


class ParseError(StorymatchError):
    pass


class ThresholdAboveCap(StorymatchError):
    pass
