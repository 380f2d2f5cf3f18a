"""Exception hierarchy.

Two failure modes get exceptions, and they map to distinct CLI exit
codes: bad configuration (exit 3) and a numerical certificate that
refused to certify (exit 4).  Verdict failures (exit 2) are plain
results, not exceptions -- a report saying "no" is a successful
computation.
"""


class RacgaffError(Exception):
    """Base class for everything raised on purpose."""

    exit_code = 1


class ConfigError(RacgaffError):
    """Invalid user input: graph, parameter range, or CLI arguments."""

    exit_code = 3


class CertificationError(RacgaffError):
    """A numerical routine could not certify its own output."""

    exit_code = 4


class ReductionBudgetError(CertificationError):
    """Chamber reduction ran out of its step budget before settling."""
