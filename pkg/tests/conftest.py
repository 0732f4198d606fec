import sys

import pytest

from marblegate import logic, netlist


@pytest.fixture(scope="session")
def gate_spec():
    return netlist.load(netlist.bundled_path("gate"))


@pytest.fixture(scope="session")
def half_spec():
    return netlist.load(netlist.bundled_path("half_adder"))


@pytest.fixture(scope="session")
def full_spec():
    return netlist.load(netlist.bundled_path("full_adder"))


@pytest.fixture(scope="session")
def gate_table(gate_spec):
    return logic.evaluate_truth_table(gate_spec)


@pytest.fixture(scope="session")
def full_table(full_spec):
    return logic.evaluate_truth_table(full_spec)


REFLECTOR = """
ramp entry    anchor=(-50,20)mm   slope=16deg dir=+x length=40mm
ramp opposite anchor=(60,21.6)mm  slope=16deg dir=-x length=100mm
source s ramp=entry input=A volume=11.6uL coating=ni_uhdpe t=0ms
sink west label=W x=[-90,-20]mm y=-30mm
sink east label=E x=[20,90]mm   y=-30mm
"""


@pytest.fixture
def reflector_spec():
    return netlist.parse(REFLECTOR)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
