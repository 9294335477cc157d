"""Shared exception bases.

ValidationError subclasses map to exit code 2 / HTTP 422 in the service;
CrossCheckFailed maps to exit code 3.  Everything else propagating out of an
operation is a bug.
"""


class ValidationError(ValueError):
    pass


class CrossCheckFailed(Exception):
    pass
