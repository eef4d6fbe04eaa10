"""Gaussian continuous-variable optics simulator.

Core layers: gaussian (states and gates), teleport (EPR circuits and
conditional teleportation), encoding (interval codes on a qumode axis),
pctc (loop and QND readout computation schemes). The service subpackage
exposes the same operations over HTTP; the CLI is a thin client of it.
"""

__version__ = "0.1.0"

from .gaussian import GaussianState, SymplecticOp, vacuum, coherent, squeezed_vacuum

__all__ = [
    "__version__",
    "GaussianState",
    "SymplecticOp",
    "vacuum",
    "coherent",
    "squeezed_vacuum",
]
