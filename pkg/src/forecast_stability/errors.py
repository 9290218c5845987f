"""Shared exception base for the package.

Every domain error raised by this library subclasses
:class:`ForecastStabilityError`, so callers (the CLI in particular) can
separate "your data/config is bad" from programming errors.
"""


class ForecastStabilityError(Exception):
    pass
