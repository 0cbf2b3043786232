import numpy as np
import pytest

from mmtc_traffic.distributions import DistributionSpec
from mmtc_traffic.scenario import (CellConfig, FixedDistance, PacketPmf, RatePmf, Scenario,
                                   UserClass)


def one_class(spec, n=1, packets=PacketPmf.fixed(1), rates=RatePmf((1000.0,), (1.0,)),
              distance=FixedDistance(0.0), cell=CellConfig(), label="c", traffic_rate=None):
    uc = UserClass.build(label, n, spec, packets, rates, distance, traffic_rate=traffic_rate)
    return Scenario(cell, (uc,), name=label)


def exp_spec(rate):
    return DistributionSpec.of("exponential", rate=rate)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
