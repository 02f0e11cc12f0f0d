"""Exception taxonomy shared across the pipeline.

Every error carries an ``exit_code`` so the CLI can map failures onto a
stable process exit status: 2 for parameter/usage problems, 3 for
data/format problems, 4 for I/O failures.
"""


class ModgraphError(Exception):
    exit_code = 1


class ParameterError(ModgraphError):
    """A parameter or flag value is out of its documented range."""

    exit_code = 2


class FormatError(ModgraphError):
    """A file container is malformed (bad magic, header, or truncation)."""

    exit_code = 3


class DataError(ModgraphError):
    """A well-formed file holds invalid content (non-finite values, bad labels)."""

    exit_code = 3


class ShapeError(ModgraphError):
    """Array rank or length does not match what the operation requires."""

    exit_code = 3


class DegenerateVectorError(ModgraphError):
    """A feature row has no usable direction (zero norm or zero variance)."""

    exit_code = 3


class EmptyGraphError(ModgraphError):
    """A graph with no positive-weight edge was passed where one is required."""

    exit_code = 3


class IoError(ModgraphError):
    """An OS-level read or write failed."""

    exit_code = 4
