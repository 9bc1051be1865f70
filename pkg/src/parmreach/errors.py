"""Common exception base for the package.

Every error raised by parmreach for a *user-facing* problem (bad model
file, ill-defined evaluation, singular system, ...) derives from
:class:`ParmreachError`, so callers -- in particular the CLI -- can
distinguish model problems from genuine bugs.
"""


class ParmreachError(Exception):
    """Base class for all errors raised by parmreach."""
