import pytest
from hypothesis import HealthCheck, settings

from decobudget import flux
from decobudget.mission import load_missions

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def missions():
    return {m.name.lower(): m for m in load_missions("all")}


@pytest.fixture(scope="session")
def photons():
    return flux.solar_photon_spectrum()


@pytest.fixture(scope="session")
def wind():
    return flux.solar_wind_spectrum()


@pytest.fixture(scope="session")
def cosmic():
    return flux.cosmic_ray_spectrum()


@pytest.fixture(scope="session")
def neutrinos_pp():
    return flux.solar_neutrino_spectrum(("pp",))


@pytest.fixture(scope="session")
def dust():
    return flux.dust_distribution()
