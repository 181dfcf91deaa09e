"""Permittivity models on the imaginary frequency axis and Matsubara grids.

Only non-magnetic materials are supported (mu = 1 everywhere); the data model
keeps a mu hook so the formulas stay general.
"""

from __future__ import annotations

from dataclasses import dataclass

from .constants import HBAR_C_EV_NM, K_B_EV_PER_K, thermal_wavevector_unit


class ZeroFrequencyDivergence(ValueError):
    """Drude permittivity diverges at xi = 0; use the zero-frequency path."""


@dataclass(frozen=True)
class DielectricModel:
    """Permittivity rule evaluated at imaginary frequencies omega = i*xi.

    kind is one of "vacuum", "constant", "drude", "plasma".  Frequencies
    (omega_p, gamma_d) are wavevectors in 1/nm; eps_const is dimensionless.
    """

    kind: str
    eps_const: float = 1.0
    omega_p: float = 0.0
    gamma_d: float = 0.0

    def __post_init__(self):
        if self.kind not in ("vacuum", "constant", "drude", "plasma"):
            raise ValueError(f"unknown dielectric model kind: {self.kind!r}")
        if self.kind == "constant" and self.eps_const < 1.0:
            raise ValueError("constant permittivity must be >= 1")
        if self.kind in ("drude", "plasma") and self.omega_p <= 0.0:
            raise ValueError("omega_p must be positive")
        if self.kind == "drude" and self.gamma_d <= 0.0:
            raise ValueError("gamma_d must be positive")

    @property
    def is_vacuum(self):
        return self.kind == "vacuum" or (self.kind == "constant" and self.eps_const == 1.0)

    def eps(self, xi):
        """epsilon(i*xi) for xi >= 0 in 1/nm.

        Raises ZeroFrequencyDivergence for the Drude model at xi = 0.
        """
        if xi < 0.0:
            raise ValueError("xi must be >= 0")
        if self.kind == "vacuum":
            return 1.0
        if self.kind == "constant":
            return self.eps_const
        if self.kind == "plasma":
            if xi == 0.0:
                raise ZeroFrequencyDivergence(
                    "plasma permittivity diverges at xi=0; use the zero-frequency limit path")
            return 1.0 + (self.omega_p / xi) ** 2
        if xi == 0.0:
            raise ZeroFrequencyDivergence(
                "Drude permittivity diverges at xi=0; use the zero-frequency limit path")
        return 1.0 + self.omega_p ** 2 / (xi * (xi + self.gamma_d))

    def eps_xi2(self, xi):
        """epsilon(i*xi) * xi^2, finite for every model including xi = 0.

        This combination sets the gamma_2^2 shift [eps*mu - 1]*xi^2 and keeps
        the xi = 0 branch free of limiting procedures: it tends to 0 for
        vacuum/constant/Drude and to omega_p^2 for the plasma model.
        """
        if xi < 0.0:
            raise ValueError("xi must be >= 0")
        if self.kind == "vacuum":
            return xi * xi
        if self.kind == "constant":
            return self.eps_const * xi * xi
        if self.kind == "plasma":
            return xi * xi + self.omega_p ** 2
        return xi * xi + self.omega_p ** 2 * xi / (xi + self.gamma_d)

    def mu(self, xi):
        """mu(i*xi); constant-1 hook (no magnetic activity)."""
        return 1.0


def vacuum():
    return DielectricModel("vacuum")


def constant(eps):
    return DielectricModel("constant", eps_const=eps)


def drude(omega_p, gamma_d):
    return DielectricModel("drude", omega_p=omega_p, gamma_d=gamma_d)


def plasma(omega_p):
    return DielectricModel("plasma", omega_p=omega_p)


def eps_imag(model: DielectricModel, xi):
    """epsilon(i*xi); operation-style wrapper around DielectricModel.eps."""
    return model.eps(xi)


def ev_to_wavevector(energy_ev):
    """Convert an energy in eV to a wavevector in 1/nm (divide by hbar*c)."""
    if energy_ev < 0.0:
        raise ValueError("energy must be >= 0")
    return energy_ev / HBAR_C_EV_NM


@dataclass(frozen=True)
class ThermalContext:
    """Temperature and the derived Matsubara wavevector spacing."""

    temperature: float

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")

    @property
    def unit(self):
        """2*pi*k_B*T/(hbar*c) in 1/nm."""
        return thermal_wavevector_unit(self.temperature)

    def matsubara_xi(self, l):
        """xi_l = l * 2*pi*k_B*T/(hbar*c); exactly linear in l."""
        if l < 0:
            raise ValueError("Matsubara index must be >= 0")
        return l * self.unit

    @property
    def beta_hbar_c(self):
        """1/(k_B*T) expressed as a length in nm, i.e. hbar*c/(k_B*T)."""
        return HBAR_C_EV_NM / (K_B_EV_PER_K * self.temperature)


def matsubara_xi(ctx: ThermalContext, l):
    return ctx.matsubara_xi(l)
