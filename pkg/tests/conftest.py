import pytest

from omsim import figures
from omsim.params import reference_params

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def fig3():
    return reference_params(pc_w=0.03)


@pytest.fixture
def fig2():
    return figures.PRESETS["2b"].params


def fig5(g):
    return figures.PRESETS["5a"].params.replace(g=g * figures.PRESETS["5a"].params.Omega_m)


@pytest.fixture
def fig5_params():
    return fig5


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
