"""Exception hierarchy shared by all capforge modules."""


class CapforgeError(Exception):
    """Base class for every error raised by capforge."""


class GeometryError(CapforgeError, ValueError):
    """Invalid or degenerate planar input."""


class OrientationError(GeometryError):
    """A closed polyline was expected to run counterclockwise."""


class BoundaryPointError(GeometryError):
    """A query point lies on the polyline, where the answer is undefined."""


class MeasureError(CapforgeError, ValueError):
    """A boundary measure failed validation."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class ConvergenceError(CapforgeError, RuntimeError):
    """A numerical procedure did not converge or could not be refined enough."""


class DisconnectedJuliaSetError(CapforgeError, ValueError):
    """The critical orbit escapes, so the filled Julia set is not connected."""


class ChartError(CapforgeError, ValueError):
    """A circle is too large for the local flat chart around a boundary point."""
