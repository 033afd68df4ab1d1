import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results: dict[int, list[bool]] = {}

TITLES = {
    1: "oracle equivalence on random programs",
    2: "non-interference (corpus + Burgers)",
    3: "finite-difference gradient check",
    4: "bit-trick suite",
    5: "CAS dual comparison and threaded accumulation",
    6: "Burgers benchmark",
    7: "limitation corpus golden values",
    8: "math wrappers and table sine",
    9: "codec round trips",
    10: "monitor session vs client requests",
}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome == "failed":
        _results.setdefault(int(m.group(1)), []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(TITLES):
        outcomes = _results.get(n)
        if outcomes is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status:7s} {TITLES[n]}")
