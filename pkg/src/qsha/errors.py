"""Exception hierarchy shared by every module.

Each class maps to a stable CLI exit code (see :mod:`qsha.cli`).
"""


class QshaError(Exception):
    exit_code = 1


class ContractViolation(QshaError, ValueError):
    """A precondition of an operation does not hold."""

    exit_code = 3


class CapacityError(QshaError):
    """The request exceeds a configured size cap (qubits, variables, bit-width)."""

    exit_code = 4


class UnsupportedGateError(QshaError):
    exit_code = 5


class InfeasibleError(QshaError):
    exit_code = 6


class AssumptionRequired(QshaError):
    """A figure needs a user-supplied parameter the source data does not provide."""

    exit_code = 7


class FormatError(QshaError, ValueError):
    """Malformed circuit, QUBO, trace or profile text."""

    exit_code = 8
