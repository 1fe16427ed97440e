"""Physical constants (SI) and unit conversions."""

from scipy import constants as _c

HBAR = _c.hbar  # J s
K_B = _c.k  # J/K
C = _c.c  # m/s
EV = _c.e  # J per eV
SIGMA_SB = _c.Stefan_Boltzmann  # W m^-2 K^-4
NM = 1e-9


def ev_to_rad(energy_ev):
    """Photon energy in eV -> angular frequency in rad/s."""
    return energy_ev * EV / HBAR


def rad_to_ev(omega):
    """Angular frequency in rad/s -> photon energy in eV."""
    return omega * HBAR / EV


def thermal_frequency(T):
    """k_B T / hbar in rad/s."""
    return K_B * T / HBAR


def thermal_wavelength(T):
    """hbar c / (k_B T) in m; about 7.6 um at 300 K."""
    if T <= 0:
        raise ValueError("thermal wavelength requires T > 0")
    return HBAR * C / (K_B * T)
