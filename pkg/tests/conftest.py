import sys


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict lines after the run, where pytest's
    output capture no longer hides them for passing tests."""
    lines = []
    for name, module in sys.modules.items():
        if name.rpartition(".")[2] == "test_acceptance":
            lines.extend(getattr(module, "VERDICTS", []))
    if lines:
        terminalreporter.section("acceptance verdicts")
        for line in lines:
            terminalreporter.write_line(line)
