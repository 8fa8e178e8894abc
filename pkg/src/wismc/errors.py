"""Exception hierarchy.

Errors fall into three families that the CLI maps to exit codes:
usage (1), data (2) and numeric/model (3).
"""

from __future__ import annotations


class WismcError(Exception):
    exit_code = 3


class UsageError(WismcError):
    exit_code = 1


class UnknownSubcommand(UsageError):
    pass


class ConflictingFlags(UsageError):
    pass


class DataError(WismcError, ValueError):
    exit_code = 2


class _LineError(DataError):
    def __init__(self, line: int, detail: str = ""):
        self.line = line
        msg = f"line {line}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class MalformedRow(_LineError):
    pass


class NonMonotoneTime(_LineError):
    pass


class NonPositivePrice(_LineError):
    pass


class EmptyInput(DataError):
    pass


class TooFewSamples(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class EvenStateCount(DataError):
    pass


class EmptyTrajectory(DataError):
    pass


class ModelError(WismcError, ValueError):
    exit_code = 3


class DegenerateDistribution(ModelError):
    pass


class DegenerateVariance(ModelError):
    pass


class UnknownState(ModelError, KeyError):
    pass


class UnknownLevel(ModelError, KeyError):
    pass


class MissingCell(ModelError):
    pass


class InvalidInitialState(ModelError):
    pass


class LagGridMismatch(ModelError):
    pass


class InvalidThreshold(ModelError):
    pass


class TimeBeforeOrigin(ModelError):
    pass


class HorizonBeforeOrigin(ModelError):
    pass
