"""Exception hierarchy shared by every module."""


class MzfError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class PoleOfGamma(MzfError):
    pass


class GammaPoleInC(MzfError):
    pass


class NoConvergence(MzfError):
    pass


class OutOfDomain(MzfError):
    pass


class ConvergenceCheckFailed(MzfError):
    pass


class InvalidTarget(MzfError):
    pass


class NoCertifiedMove(MzfError):
    pass


class DepthCapExceeded(MzfError):
    pass


class NotAnInteger(MzfError):
    pass


class MissingTableEntry(MzfError):
    pass


class SingularTerm(MzfError):
    """A coefficient sits on a pole that only cancels across index values."""


class ConfigError(MzfError):
    pass
