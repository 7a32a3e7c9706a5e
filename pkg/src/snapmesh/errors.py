class SnapMeshError(Exception):
    """Base class for all library errors."""


class ConfigError(SnapMeshError):
    """Invalid or inconsistent configuration (unknown ids, colors, methods)."""


class LoadError(SnapMeshError):
    """A piece, config or map file could not be parsed or violates an invariant."""

    def __init__(self, message: str, path: str | None = None, field: str | None = None):
        self.path = path
        self.field = field
        where = ":".join(p for p in (path, field) if p)
        super().__init__(f"{where}: {message}" if where else message)


class RegistrationError(SnapMeshError):
    """A generation method name was registered twice."""


class NoWalkableSurfaceError(SnapMeshError):
    """Validation was requested on a map without any walkable triangle."""
