from __future__ import annotations

RESULTS: dict[int, tuple[str, bool, str]] = {}


def record(number: int, title: str, passed: bool, note: str = "") -> None:
    RESULTS[number] = (title, passed, note)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}" + (f"  ({note})" if note else ""))


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        title, passed, note = RESULTS[n]
        line = f"criterion {n}: {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({note})" if note else ""))
