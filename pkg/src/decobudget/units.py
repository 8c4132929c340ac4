"""Natural units (hbar = c = 1, energies in eV) and boundary conversions.

Everything inside the package works in eV and eV^-1.  Physical inputs
(metres, seconds, cm^-2 s^-1 eV^-1 fluxes, ...) are converted on the way
in and rates are converted to s^-1 on the way out.
"""

import math

HBARC_EV_M = 197.3269804e-9  # eV m
HBAR_EV_S = 6.582119569e-16  # eV s
C_CM_S = 2.99792458e10
EV_J = 1.602176634e-19
K_B_EV = 8.617333262e-5  # eV / K
HC_EV_UM = 2 * math.pi * HBARC_EV_M * 1e6  # eV um

# lengths and times expressed in eV^-1
METER = 1.0 / HBARC_EV_M
CM = METER * 1e-2
MM = METER * 1e-3
UM = METER * 1e-6
NM = METER * 1e-9
FM = METER * 1e-15
ANGSTROM = METER * 1e-10
SECOND = 1.0 / HBAR_EV_S
YEAR = 365.25 * 86400.0  # s

AU_M = 1.495978707e11
BOHR_RADIUS_M = 5.29177210903e-11
BOHR_RADIUS_ANGSTROM = 0.529177210903

ALPHA_EM = 7.2973525693e-3
PROTON_MASS = 938.27208816e6
ELECTRON_MASS = 0.51099895e6
NUCLEON_MASS = 931.494e6  # per-nucleon mass used to build atomic masses
Z_BOSON_MASS = 91.1876e9
SIN2_THETA_W = 0.23
G_FERMI_MEASURED = 1.1664e-5 * 1e-18  # eV^-2

ENERGY_UNITS = {"eV": 1.0, "keV": 1e3, "MeV": 1e6, "GeV": 1e9, "TeV": 1e12}
AREA_UNITS = {"cm^2": 1.0, "m^2": 1e4}  # in cm^2
WAVELENGTH_UNITS = {"um": 1.0, "nm": 1e-3}  # in um


def flux_to_natural(value):
    """cm^-2 s^-1 eV^-1 -> eV^2."""
    return value / (CM**2 * SECOND)


def density_to_natural(value):
    """cm^-3 eV^-1 -> eV^2."""
    return value / CM**3


def rate_to_per_second(gamma_ev):
    return gamma_ev / HBAR_EV_S


def energy_in_ev(value, unit):
    try:
        return value * ENERGY_UNITS[unit]
    except KeyError:
        from .errors import UnitError

        raise UnitError(f"unknown energy unit {unit!r}") from None
