import pytest
from hypothesis import settings

from assoc_totient.euler import dirichlet_spec, parse_product_spec, zeta_spec
from assoc_totient.sources import DirichletCharacter

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

DELTA_CHI5 = "gl2:source=delta,chi=q=5,index=1"

# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def zeta():
    return zeta_spec()


@pytest.fixture(scope="session")
def chi4():
    return dirichlet_spec(DirichletCharacter(4, (1,)))


@pytest.fixture(scope="session")
def delta_chi5():
    return parse_product_spec(DELTA_CHI5)


@pytest.fixture(scope="session")
def builtin_specs(zeta, chi4, delta_chi5):
    return {"zeta": zeta, "chi4": chi4, "delta_chi5": delta_chi5}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[1].split()[0])):
            terminalreporter.write_line(line)
