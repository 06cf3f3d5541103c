"""Kinetic/fluid analysis toolkit for the one-dimensional plasma model
with self-consistent electrostatic coupling and hard-sphere collisions.

Submodules
----------
velocity    axisymmetric velocity-space discretization
collision   linearized collision operator and transport coefficients
spectral    frequency-domain operator, eigenvalue branches, dispersion roots
green       pointwise Green's-function synthesis and kinetic wave fronts
moments     macroscopic moment extraction and fluid (NSP) closure
nonlinear   perturbative nonlinear time integration
cli         command-line studies and run manifests
"""

__version__ = "0.1.0"
