import os

# keep numba quiet about the TBB version on systems with an old libtbb
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

VERDICTS = {}


def record(number, ok, detail):
    """Store one acceptance verdict; the terminal summary prints them in order."""
    VERDICTS[number] = (bool(ok), detail)
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        ok, detail = VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
