"""DEM + state-based peridynamics with SDF particle geometries."""

from ._pmech import *  # noqa: F401,F403
from ._pmech import __doc__  # noqa: F401
