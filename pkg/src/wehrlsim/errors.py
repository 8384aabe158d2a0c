"""Exception hierarchy.

Every error carries a coarse category that the command line tool maps to
an exit status: "config" (2), "numerical" (3) or "io" (4).
"""


class WehrlSimError(Exception):
    category = "numerical"


class ConfigError(WehrlSimError):
    category = "config"


class ParseError(ConfigError):
    """Malformed config input (bad syntax, bad literal)."""


class ValidationError(ConfigError):
    """One or more config values violate their constraints.

    Collects every violation so the user sees them all at once.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DimensionMismatchError(WehrlSimError):
    pass


class NonInvertibleError(WehrlSimError):
    def __init__(self, level, value):
        self.level = level
        self.value = value
        super().__init__(
            f"square-root Taylor factor is {value:.6g} at occupation {level}; "
            "it must stay positive to be invertible"
        )


class NegativeTimeError(WehrlSimError):
    pass


class StepSizeInvalidError(WehrlSimError):
    pass


class PositivityViolationError(WehrlSimError):
    def __init__(self, t, min_eig):
        self.t = t
        self.min_eig = min_eig
        super().__init__(
            f"density matrix lost positivity at t = {t:.6g} "
            f"(min eigenvalue {min_eig:.3e}); reduce the time step"
        )


class AngleOutOfRangeError(WehrlSimError):
    pass


class NegativeQError(WehrlSimError):
    pass


class UnsupportedOperatorError(WehrlSimError):
    pass


class NonPositiveInputError(WehrlSimError):
    pass


class NotConvergedError(WehrlSimError):
    pass


class WindowTooLargeError(WehrlSimError):
    pass


class OutputError(WehrlSimError):
    category = "io"
