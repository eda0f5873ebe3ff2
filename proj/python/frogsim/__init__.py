"""Frog model with death: simulation and estimation."""

from ._frogsim import *  # noqa: F401,F403
from ._frogsim import __doc__  # noqa: F401

__version__ = "0.1.0"
