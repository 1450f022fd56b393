"""Exception types shared across the package."""


class FormatError(ValueError):
    """A serialized artifact (codebook file, code stream, manifest) is malformed.

    The message names the offending field or record.
    """


class CapacityError(RuntimeError):
    """A requested computation exceeds an explicit size guard."""
