"""Constant quaternion difference attitude dynamics.

Analysis and simulation of a body attitude ``q`` that keeps a constant
componentwise difference ``q - p`` from a desired attitude ``p``: the
constraint relations, the nominal error flow and its linearization, a
closed-form spectrum and stability classification, an exact family of
constant-difference trajectories, tracking controllers and a fixed-step
simulator.
"""

__version__ = "0.1.0"

from .dynamics import ErrorState, error_quat, v_from_w, w_from_v
from .errors import QuatDiffError
from .stability import StabilityClass, build_A, char_poly_closed, classify, eigenvalues
from .trajectory import TrajectoryParams, sample

__all__ = [
    "__version__",
    "ErrorState",
    "QuatDiffError",
    "StabilityClass",
    "TrajectoryParams",
    "build_A",
    "char_poly_closed",
    "classify",
    "eigenvalues",
    "error_quat",
    "sample",
    "v_from_w",
    "w_from_v",
]
