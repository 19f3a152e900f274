import os

import pytest

# Keep reference caches hermetic: never touch the user's cache during tests.
@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("GEOMFLOW_CACHE_DIR", str(tmp_path / "geomflow-cache"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "xfailed", "xpassed"):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance" not in str(getattr(report, "nodeid", "")):
                continue
            name = report.nodeid.split("::")[-1]
            if status == "passed":
                tag = "PASS"
            elif status == "xfailed":
                tag = "FAIL (expected; see decisions ledger)"
            elif status == "xpassed":
                tag = "PASS (unexpectedly; marked xfail)"
            else:
                tag = "FAIL"
            lines.append((name, tag))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, tag in sorted(lines):
            terminalreporter.write_line(f"{name:<58s} {tag}")
