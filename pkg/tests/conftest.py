"""Shared fixtures.

ENZ energy samples are the expensive part of the suite, so they are
computed once per session for every ``m`` the tests use.
"""

import time
from dataclasses import dataclass

import pytest

from emreg import em_core, extractor
from emreg.summands import EnzEnergyFamily

M_VALUES = tuple(range(2, 9))
ENZ_N0 = {"TE": 1, "TM": 0}


@dataclass
class EnzData:
    family: EnzEnergyFamily
    n0: int
    grid: tuple
    samples: dict
    epsilons: dict
    seconds: float

    def config(self, m=3):
        return em_core.EMConfig(n=0, n0=self.n0, m=m, sigma_grid=self.grid)

    def report(self, m=3, model_spec=None):
        return extractor.extract_beta(self.family, self.config(m), model_spec,
                                      samples=self.samples[m], epsilon=self.epsilons[m])


def _enz_data(sector):
    t0 = time.perf_counter()
    f = EnzEnergyFamily(sector)
    grid = em_core.default_sigma_grid()
    n0 = ENZ_N0[sector]
    samples = extractor.sample_gamma(f, 0, n0, M_VALUES, grid)
    eps = {m: em_core.tail_bound_epsilon(f, n0, m, grid[0]) for m in M_VALUES}
    return EnzData(f, n0, grid, samples, eps, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def enz_te():
    return _enz_data("TE")


@pytest.fixture(scope="session")
def enz_tm():
    return _enz_data("TM")


@pytest.fixture(scope="session")
def enz(enz_te, enz_tm):
    return {"TE": enz_te, "TM": enz_tm}


# acceptance verdicts, printed once at the end of the session
ACCEPTANCE = {}


def record_criterion(number, checks):
    """Store ``(label, ok, detail)`` checks for criterion ``number``."""
    ACCEPTANCE[number] = list(checks)
    return all(ok for _, ok, _ in checks)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[number]
        verdict = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        tr.write_line(f"{verdict} criterion {number}")
        for label, ok, detail in checks:
            tr.write_line(f"    [{'ok' if ok else 'FAIL'}] {label}: {detail}")
