"""Python bindings for the borealis sensor-network simulator."""

from ._borealis import *  # noqa: F401,F403
from ._borealis import __doc__  # noqa: F401
