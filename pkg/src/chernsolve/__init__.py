"""chernsolve: monotone-iteration solver for prescribed Chern scalar
curvature equations on conformally flat Hermitian models."""

__version__ = "0.1.0"
