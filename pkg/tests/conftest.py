import pytest
from hypothesis import settings

from linkforge.experiment import build_matcher, standard_benchmark, train_models

settings.register_profile("default", deadline=None, derandomize=True)
settings.load_profile("default")

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def bench():
    return standard_benchmark()


@pytest.fixture(scope="session")
def models(bench):
    return train_models([r.title for r in bench.reference])


@pytest.fixture(scope="session")
def matcher(bench, models):
    return build_matcher(bench.reference, models)


@pytest.fixture(scope="session")
def sweep_cells(bench, matcher):
    from linkforge.eval import sweep_cmm
    return sweep_cmm(matcher, bench.target, bench.truth)


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one summary line per acceptance criterion."""
    def record(number: int, name: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {name}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
