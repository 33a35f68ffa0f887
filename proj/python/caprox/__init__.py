"""Capacitive proximity distance-servoing simulator.

Thin wrapper over the C++ core: sensor forward model, inverse-law
calibration, arm environment, PD distance controller, and the trial/matrix
evaluation harness.
"""

from ._core import *  # noqa: F401,F403

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
