"""Pseudospectral laboratory for ``i u_t + u_xx + i (|u|^(2 sigma) u)_x = 0``.

Submodules
----------
grid, norms        periodic grids, spectral calculus, L^p / Sobolev / Lorentz norms
exact              free Gaussians and solitary waves in closed form
invariants         mass, energy, Hamiltonian and the scaling symmetry
evolve             ETDRK4 / IF-RK4 time stepping with a tail guard
vector_field       L = x + 2 i t d_x and its energy diagnostics
packets            wave packets, the profile gamma(t, v) and the ODE remainder
asymptotics        scattering profile W, expansions and decay fits
config, io         YAML configuration, snapshot files and CSV tables
experiments, cli   experiments E1-E5 and the command line
"""

__version__ = "0.1.0"

from .errors import LabError  # noqa: E402
from .grid import Field, Grid1D, Spectrum  # noqa: E402

__all__ = ["__version__", "LabError", "Field", "Grid1D", "Spectrum"]
