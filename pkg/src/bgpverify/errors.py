"""Exception types shared across the package."""


class SpecificationError(Exception):
    """A contract violation in how the API is being used (undeclared ghost,
    missing route map, location not in the topology, ...)."""


class ConfigError(ValueError):
    """A problem in an input document (syntax or semantic).

    ``where`` carries a human-readable position: either ``line L, column C``
    for JSON syntax errors or a JSON-path-like context such as
    ``policies[3].edge`` for semantic ones.
    """

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{message} (at {where})" if where else message)


class InstanceTooLargeError(Exception):
    """Raised when trace enumeration is asked to run on an instance beyond
    the safety guard and ``force`` was not given."""
