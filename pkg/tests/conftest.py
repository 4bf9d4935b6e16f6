import numpy as np
import pytest

from sshdpt.lattice import build_ssh, edge_state
from sshdpt.spectral import eigendecompose

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def trivial8():
    """8-site chain with 60 Hz intracell and 20 Hz intercell bonds."""
    return build_ssh(4, 60.0, 20.0)


@pytest.fixture(scope="session")
def topological8():
    return build_ssh(4, 20.0, 60.0)


@pytest.fixture(scope="session")
def e1():
    return edge_state(8)


@pytest.fixture(scope="session")
def trivial8_eig(trivial8):
    return eigendecompose(trivial8)


@pytest.fixture(scope="session")
def topological8_eig(topological8):
    return eigendecompose(topological8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def replica():
    """Carrier-level run of the eight-beam bank with 60/20 Hz drives over 40 ms.

    Returns ``(times, normalized trace, reference envelopes, wall seconds)``;
    the reference comes from dense matrix exponentials, not the package solver.
    """
    import time

    from oracles import expm_state
    from sshdpt.mech import DriveSchedule, OscillatorBank, normalize_instant, simulate_envelopes

    chain = build_ssh(4, 60.0, 20.0)
    bank = OscillatorBank.beams_8()
    schedule = DriveSchedule.for_couplings(bank, chain.couplings)
    times = np.linspace(0.0, 0.04, 401)
    psi0 = edge_state(8)
    simulate_envelopes(bank, schedule, psi0, times[:2], max_coupling_hz=60.0)  # compile
    start = time.perf_counter()
    trace = simulate_envelopes(bank, schedule, psi0, times, max_coupling_hz=60.0)
    wall = time.perf_counter() - start
    reference = np.array([expm_state(chain.couplings, psi0, t) for t in times])
    return times, normalize_instant(trace), reference, wall


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}")
        assert ok, detail

    return record
