import numpy as np
import pytest

from dphav.splitcond import split
from dphav.states import DphavSpec

# reference parameter sets (alpha^2, beta^2)
SPEC_7_6 = DphavSpec(np.sqrt(7.0), np.sqrt(6.0))
SPEC_617_713 = DphavSpec.from_intensities(6.17, 7.13)
SPEC_3_713 = DphavSpec.from_intensities(3.0, 7.13)


@pytest.fixture
def amps_7_6():
    return split(SPEC_7_6)


@pytest.fixture
def amps_617_713():
    return split(SPEC_617_713)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
