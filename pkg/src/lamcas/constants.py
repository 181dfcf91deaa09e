"""Pinned physical constants and the internal unit system.

All frequencies are stored as wavevectors in 1/nm (omega/c -> omega) and all
lengths in nm, so the core math never carries units.  SI conversion factors
are applied only at the output boundary.
"""

# hbar*c, used to convert energies in eV to wavevectors in 1/nm.
HBAR_C_EV_NM = 197.3269804

# Boltzmann constant in eV/K.
K_B_EV_PER_K = 8.617333262e-5

# hbar*c in J*m, used to convert internal results to SI.
HBAR_C_J_M = 3.16152677e-26

# Pressure conversion: an integral with dimension nm^-4 times hbar*c.
#   P[Pa] = PRESSURE_SI * (integral in nm^-4)
PRESSURE_SI = HBAR_C_J_M * 1e36

# Free energy per unit area: nm^-3 integral times hbar*c.
#   F[J/m^2] = ENERGY_SI * (integral in nm^-3)
ENERGY_SI = HBAR_C_J_M * 1e27

# Riemann zeta(3), used by the large-distance asymptote.
ZETA_3 = 1.2020569031595943


def thermal_wavevector_unit(temperature):
    """Matsubara spacing 2*pi*k_B*T/(hbar*c) in 1/nm for temperature in K."""
    return 2.0 * 3.141592653589793 * K_B_EV_PER_K * temperature / HBAR_C_EV_NM
