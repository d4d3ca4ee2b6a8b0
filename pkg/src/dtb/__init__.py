"""Data-driven reduced-order models of wave propagation and the Data-to-Born transform.

Submodules are imported explicitly (``from dtb import forward, siso``) so the
command-line entry point can set thread limits before numpy loads.
"""

__version__ = "0.1.0"

__all__ = ["linalg", "forward", "gram", "siso", "mimo", "dtb", "inversion", "models", "checks", "io", "cli"]
