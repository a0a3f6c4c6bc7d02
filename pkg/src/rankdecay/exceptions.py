"""Exception hierarchy for rankdecay."""


class RankDecayError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(RankDecayError, ValueError):
    """An operation was called outside its precondition domain."""


class InvalidEventError(RankDecayError, ValueError):
    """A single event is malformed (empty ids, non-positive timestamp)."""


class LogFormatError(RankDecayError, ValueError):
    """An event log file cannot be parsed."""


class UnsortedLogError(RankDecayError, ValueError):
    """Events are not in ascending timestamp order."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"event at index {index} is out of timestamp order")


class SnapshotError(RankDecayError):
    """Base class for snapshot load failures."""


class SnapshotFormatError(SnapshotError, ValueError):
    """Snapshot file is truncated or structurally invalid."""


class SnapshotVersionError(SnapshotError):
    """Snapshot was written by an unsupported format version."""

    def __init__(self, found, expected):
        self.found = found
        self.expected = expected
        super().__init__(f"unsupported snapshot version {found!r} (expected {expected})")


class SnapshotChecksumError(SnapshotError):
    """Snapshot body does not match its recorded SHA-256 checksum."""
