"""Exception types shared by the solvers and the command-line front end."""


class MemkernelError(ValueError):
    """Base class for all errors raised deliberately by memkernel."""


class ConfigError(MemkernelError):
    """The scenario configuration is invalid or references missing files."""


class SolverError(MemkernelError):
    """A numerical precondition failed while solving (exit status 2)."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}
