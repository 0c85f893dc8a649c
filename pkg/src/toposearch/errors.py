"""Shared exception types."""


class DataFormatError(Exception):
    """A file or payload does not conform to its documented format."""
