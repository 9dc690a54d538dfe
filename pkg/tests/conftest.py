import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import ACCEPTANCE_LINES  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted({c for c, *_ in ACCEPTANCE_LINES}):
        checks = [x for x in ACCEPTANCE_LINES if x[0] == crit]
        failed = [name for _, name, ok, _ in checks if not ok]
        verdict = "FAIL" if failed else "PASS"
        extra = f" (failed: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {crit}: {verdict} {len(checks) - len(failed)}/{len(checks)} checks{extra}")
    terminalreporter.write_line("")
    for crit, name, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"  [{'PASS' if ok else 'FAIL'}] {crit}.{name}: {detail}")
