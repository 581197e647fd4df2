"""Fourier-space solver and metric toolkit for the homogeneous Boltzmann equation."""

from ._bobylev import *  # noqa: F401,F403
from ._bobylev import Error, __doc__  # noqa: F401

__version__ = "0.1.0"
