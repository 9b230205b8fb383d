"""Shared fixtures, plus a recorder that audits every hybrid precoder any
test obtains from a solver (power, interference, unit modulus)."""
import numpy as np
import pytest

from hybridcr import _admm
from _scenarios import scenario_at, small_config
from hybridcr.numerics import fro2

FEASIBILITY_RTOL = 1e-9
UNIT_MODULUS_ATOL = 1e-12

RECORDED = []  # (power excess, interference excess, unit-modulus error)
ACCEPTANCE = {}  # criterion number -> (passed, detail)


def precoder_excess(scenario, pre):
    c = scenario.config
    f = pre.f_rf @ pre.f_bb
    return (fro2(f) / c.P_max - 1.0, fro2(scenario.H_ps @ f) / c.I_max - 1.0,
            float(np.max(np.abs(np.abs(pre.f_rf) - 1.0))))


def is_feasible(excess):
    p, i, um = excess
    return p <= FEASIBILITY_RTOL and i <= FEASIBILITY_RTOL and um <= UNIT_MODULUS_ATOL


@pytest.fixture(autouse=True, scope="session")
def _record_precoders():
    original = _admm.finalize_precoder

    def recording(scenario, f_rf, f_bb):
        try:
            pre = original(scenario, f_rf, f_bb)
        except Exception:
            RECORDED.append((np.inf, np.inf, np.inf))
            raise
        RECORDED.append(precoder_excess(scenario, pre))
        return pre

    _admm.finalize_precoder = recording
    yield
    _admm.finalize_precoder = original


def pytest_collection_modifyitems(session, config, items):
    # acceptance last, so the feasibility criterion sees every solver run
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")


def pytest_sessionfinish(session, exitstatus):
    bad = [e for e in RECORDED if not is_feasible(e)]
    if bad and session.exitstatus == 0:
        session.exitstatus = 1
    session.config._hybridcr_feasibility = (len(RECORDED), len(bad))
    if 4 in ACCEPTANCE:
        ACCEPTANCE[4] = (ACCEPTANCE[4][0] and not bad,
                         f"{len(RECORDED) - len(bad)}/{len(RECORDED)} precoders feasible "
                         "over the whole session")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    n, bad = getattr(config, "_hybridcr_feasibility", (len(RECORDED), 0))
    tr = terminalreporter
    tr.section("hybrid precoder feasibility audit")
    tr.write_line(f"{n} precoders returned by solvers, {bad} infeasible "
                  f"(tolerance {FEASIBILITY_RTOL:g} relative, unit modulus {UNIT_MODULUS_ATOL:g})")
    if ACCEPTANCE:
        tr.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            ok, detail = ACCEPTANCE[k]
            tr.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_scenario():
    return scenario_at(small_config(), 3)
