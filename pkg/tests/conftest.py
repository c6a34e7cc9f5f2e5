import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from insulate.fem import SourceField
from insulate.geometry import LayerShape, RadialShape, mesh_disk, mesh_layered

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# acceptance results, filled by tests/test_acceptance.py and printed at the end
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def unit_source():
    return SourceField.constant(1.0)


@pytest.fixture(scope="session")
def unit_disk():
    return RadialShape.disk(1.0)


@pytest.fixture(scope="session")
def disk_mesh_coarse():
    return mesh_disk(1.0, 0.1)


@pytest.fixture(scope="session")
def disk_mesh_fine():
    return mesh_disk(1.0, 0.02)


@pytest.fixture(scope="session")
def annulus_mesh(unit_disk):
    return mesh_layered(unit_disk, LayerShape.constant(1.0), 0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
