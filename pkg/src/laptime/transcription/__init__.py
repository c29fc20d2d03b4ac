"""Direct transcription of the lap-time optimal control problem."""

from .defects import difference_stencil, sum_stencil, trapezoid_defects
from .jacobian import color_columns, fd_jacobian
from .layout import VariableLayout
from .ocp import DesignSpec, LapOcp, OcpOptions, control_only_design
from .scaling import VariableScaling, row_scale_from_jacobian

__all__ = [
    "trapezoid_defects",
    "difference_stencil",
    "sum_stencil",
    "fd_jacobian",
    "color_columns",
    "VariableLayout",
    "VariableScaling",
    "row_scale_from_jacobian",
    "DesignSpec",
    "LapOcp",
    "OcpOptions",
    "control_only_design",
]
