"""Finite-temperature Casimir interactions of 1D lamellar gratings by the
quasi-analytical modal method: exact grating eigenfunctions, numerically
solved transcendental eigenvalues, stabilized block scattering matrices, and
inversion-free determinants summed over Matsubara frequencies."""

__version__ = "0.1.0"

from .engine import (CasimirConfig, Structure, filling_factor_asymptote,
                     free_energy, grating, large_distance_asymptote,
                     lifshitz_plane_plane, multilayer, plane, pressure)
from .geometry import GratingGeometry, SpectralPoint
from .materials import (DielectricModel, ThermalContext, constant, drude,
                        ev_to_wavevector, plasma, vacuum)

__all__ = [
    "CasimirConfig", "DielectricModel", "GratingGeometry", "SpectralPoint",
    "Structure", "ThermalContext", "constant", "drude", "ev_to_wavevector",
    "filling_factor_asymptote", "free_energy", "grating",
    "large_distance_asymptote", "lifshitz_plane_plane", "multilayer", "plane",
    "plasma", "pressure", "vacuum", "__version__",
]
