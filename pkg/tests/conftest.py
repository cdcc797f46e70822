import pytest

_CRITERIA = {
    1: "octonion table exactness",
    2: "sigma identity fuzz",
    3: "SL conditions, both directions",
    4: "symplectic pairing identity",
    5: "holomorphic graph SL scenario",
    6: "associative exp example",
    7: "coassociative scenarios",
    8: "Cayley scenario",
    9: "frame route agreement",
    10: "ODE family",
    11: "determinism",
}
_outcomes: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args[0]))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome == "failed" or (report.when == "setup" and report.skipped):
        if hasattr(report, "wasxfail"):
            status = "xfail"
        else:
            status = report.outcome
        _outcomes.setdefault(crit, []).append((report.nodeid.split("::")[-1], status))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, label in _CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n:2d} ({label}): NOT RUN")
            continue
        bad = [name for name, s in results if s != "passed"]
        verdict = "PASS" if not bad else "FAIL"
        extra = f"  [not met: {', '.join(bad)}]" if bad else ""
        tr.write_line(f"criterion {n:2d} ({label}): {verdict} ({len(results) - len(bad)}/{len(results)} checks){extra}")
