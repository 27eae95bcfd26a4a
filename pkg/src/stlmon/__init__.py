"""Interval-certified monitoring of bounded STL properties of ODE systems."""

from ._kernels import BACKEND as kernel_backend
from .interval import EMPTY, Interval

__all__ = ["Interval", "EMPTY", "kernel_backend"]
__version__ = "0.1.0"
