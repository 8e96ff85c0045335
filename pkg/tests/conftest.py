from __future__ import annotations

import pytest

from monotraj.simulator import BUILTIN_NAMES, SimulatedScenario, builtin_scenario

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def scenarios() -> dict[str, SimulatedScenario]:
    """All nine builtin scenarios, shared so box caches are computed once."""
    return {name: SimulatedScenario(builtin_scenario(name)) for name in BUILTIN_NAMES}


@pytest.fixture(scope="session")
def seq_dataset(tmp_path_factory):
    """seq01 and seq04 written to disk once via the simulator."""
    from monotraj.simulator import generate_scenario

    root = tmp_path_factory.mktemp("data")
    for name in ("seq01", "seq04"):
        generate_scenario(builtin_scenario(name), root / name)
    return root


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {n}: {detail}")
