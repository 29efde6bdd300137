class PlotsError(Exception):
    """Base class for plotting failures."""


class SchemaError(PlotsError):
    """A required CSV column or header is missing or malformed."""


class NoDataError(PlotsError):
    """The inputs contain no rows to plot after filtering."""
