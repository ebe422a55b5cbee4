"""Radial pseudo-spectral lab for mass-subcritical NLS.

Modules: ``radial_transform`` (Hankel grids and fields), ``localization``
(cutoffs and Littlewood-Paley projectors), ``propagator`` (free flow and a
kernel oracle), ``norms``, ``nls_solver`` (split-step solver and the v/w
split), ``experiments`` and ``cli``.
"""

from .nls_solver import EquationParams
from .radial_transform import RadialField, RadialGrid, Side, build_grid, sample_radial

__all__ = ["EquationParams", "RadialField", "RadialGrid", "Side", "build_grid", "sample_radial"]
__version__ = "0.1.0"
