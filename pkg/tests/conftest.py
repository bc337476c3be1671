from __future__ import annotations

import pytest

from hp2kit import flips
from hp2kit.complex import f_vector, from_facets

FLIP_LOG: list[tuple[int, int]] = []  # (facets before, n) per checked flip


CRITERIA: dict[int, list[tuple[str, str, float]]] = {}  # k -> (test id, outcome, seconds)


def pytest_addoption(parser):
    parser.addoption("--run-long", action="store_true", help="run the multi-hour searches")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = "skipped" if report.skipped else report.outcome
        CRITERIA.setdefault(marker, []).append((report.nodeid, outcome, report.duration))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        runs = CRITERIA[k]
        outcomes = {o for _, o, _ in runs}
        if "failed" in outcomes:
            verdict = "FAIL"
        elif outcomes == {"skipped"}:
            verdict = "SKIP"
        else:
            verdict = "PASS"
        seconds = sum(t for _, _, t in runs)
        failed = [nid.split("::")[-1] for nid, o, _ in runs if o == "failed"]
        extra = f" failing: {', '.join(failed)}" if failed else ""
        terminalreporter.write_line(
            f"criterion {k:>2} [PRIMARY]: {verdict}  ({len(runs)} checks, {seconds:.1f} s){extra}")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-long"):
        return
    skip = pytest.mark.skip(reason="needs --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True, scope="session")
def checked_flips():
    """Every triple flip in the run is checked for f-vector and involution."""
    original = flips._flip_facets

    def checked(facets, t):
        before = set(facets)
        after = original(before, t)
        assert original(after, flips.inverse_triple(t)) == before, f"flip {t} is not an involution"
        n = max(before | after).bit_length()
        assert f_vector(from_facets(n, after)) == f_vector(from_facets(n, before)), f"flip {t} moved f"
        FLIP_LOG.append((len(before), n))
        return after

    flips._flip_facets = checked
    yield FLIP_LOG
    flips._flip_facets = original


@pytest.fixture(scope="session")
def a5_graph():
    from hp2kit.atlas import hp2_seed

    return flips.flip_graph_component(hp2_seed("hp2_a5"), threads=1)
