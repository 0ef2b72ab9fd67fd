"""Prey-predator jump-diffusion simulation and additional-food control."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
