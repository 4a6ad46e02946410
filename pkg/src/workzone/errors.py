"""Exception types shared across the package.

DataError covers malformed or inconsistent *content* (labels, configs,
XML, image headers); plain OSError is left to the caller for anything
filesystem-related. The CLI maps the two onto distinct exit codes.
"""


class DataError(Exception):
    """Input content is malformed or violates a documented contract."""


class LabelError(DataError):
    """Bad annotation or prediction line; message carries the line number."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += f"{path}: "
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)


class ConfigError(DataError):
    """Bad dataset or pipeline config file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CvatError(DataError):
    """Unsupported or malformed CVAT XML content."""


class ImageFormatError(DataError):
    """Image file outside the supported PNG/PPM subset."""
