import pytest

from thermomech.scenarios import DissipativePiston, PistonAdiabatic, WagonAdiabatic
from thermomech.thermo import BodyParams, IdealGasParams

G3_GAS = IdealGasParams(n0r=1.0, alpha=1.5)
G3 = DissipativePiston(m=1.0, g=9.0, A=1.0, gas=G3_GAS, body=BodyParams(0.5), mu=0.8,
                       kappa=0.2, x0=15.0, v0=0.0, T_init=25.0, Tc_init=20.0)
UNIT_PISTON = PistonAdiabatic(m=1.0, g=1.0, A=1.0, gas=G3_GAS, x0=1.0, T_init=1.0)
UNIT_WAGON = WagonAdiabatic(m=1.0, mu=1.0, body=BodyParams(1.0), v0=1.0, T_init=1.0)


@pytest.fixture
def g3():
    return G3


@pytest.fixture
def unit_piston():
    return UNIT_PISTON


@pytest.fixture
def unit_wagon():
    return UNIT_WAGON


_VERDICTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_VERDICTS] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    title = (item.function.__doc__ or item.name).strip().splitlines()[0]
    verdict = "PASS" if call.excinfo is None else "FAIL"
    item.config.stash[_VERDICTS][marker.args[0]] = (title, verdict)


def pytest_terminal_summary(terminalreporter, config):
    verdicts = config.stash.get(_VERDICTS, {})
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(verdicts):
        title, verdict = verdicts[number]
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {title}")
