import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).parent))

_ACCEPTANCE = []


def record_acceptance(criterion: int, ok: bool, detail: str):
    _ACCEPTANCE.append((criterion, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(_ACCEPTANCE, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
