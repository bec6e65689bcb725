"""Manifold-based basis functions with prescribed creases on quad meshes,
plus a Kirchhoff-Love thin-shell solver and convergence harness."""

__version__ = "0.1.0"
