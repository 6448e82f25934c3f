"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad keys, bad values, unknown descriptors."""


class NumericalError(RuntimeError):
    """A solver produced non-finite values; carries the failing step index."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NoCertificateError(RuntimeError):
    """The contraction factor came out >= 1, so no decay certificate exists."""

    def __init__(self, message, gamma=None, branches=None):
        super().__init__(message)
        self.gamma = gamma
        self.branches = branches
