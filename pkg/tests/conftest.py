import pytest

from txnforge.abm import paper_config, run
from txnforge.features import extract_features


@pytest.fixture(scope="session")
def simple_run():
    return run(paper_config("simple", seed=42))


@pytest.fixture(scope="session")
def graph_run():
    return run(paper_config("graph", seed=42))


@pytest.fixture(scope="session")
def graph_features(graph_run):
    return extract_features(graph_run)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, title, detail = RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  [{number:2d}] {title}: {detail}")
