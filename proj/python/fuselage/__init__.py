"""Uncertainty-aware fusion of RGB and depth detections."""

from ._fuselage import *  # noqa: F401,F403
from ._fuselage import __doc__  # noqa: F401

__version__ = "0.1.0"
