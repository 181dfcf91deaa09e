import math

import pytest

from lamcas.geometry import GratingGeometry, SpectralPoint
from lamcas.materials import ThermalContext, drude, ev_to_wavevector, vacuum
from lamcas.modes import Region

OMEGA_P = ev_to_wavevector(8.39)
GAMMA_D = ev_to_wavevector(0.043)


@pytest.fixture(scope="session")
def gold():
    return drude(OMEGA_P, GAMMA_D)


@pytest.fixture(scope="session")
def paper_geometry():
    return GratingGeometry(160.0, 90.0, 216.0)


@pytest.fixture(scope="session")
def paper_region(paper_geometry, gold):
    return Region(paper_geometry, vacuum(), gold)


@pytest.fixture(scope="session")
def xi1():
    return ThermalContext(300.0).matsubara_xi(1)


@pytest.fixture(scope="session")
def paper_point(paper_geometry, xi1):
    p = paper_geometry.period
    return SpectralPoint(xi1, 0.5 * math.pi / p, 0.0, p)
