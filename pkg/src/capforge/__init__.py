"""Cap developments of planar shapes with boundary curvature measures."""

from .cap import CapDevelopment, NaiveCap, bend_interval, cap_angles, cap_boundary, interior_development, naive_cap
from .errors import (
    BoundaryPointError,
    CapforgeError,
    ChartError,
    ConvergenceError,
    DisconnectedJuliaSetError,
    GeometryError,
    MeasureError,
    OrientationError,
)
from .geometry import Polyline, arclength_parametrize, is_simple, turning_angles
from .measure import BoundaryMeasure, make_curvature, turning_measure, validate

__version__ = "0.1.0"
