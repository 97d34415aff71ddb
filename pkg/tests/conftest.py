import sys


def pytest_terminal_summary(terminalreporter):
    acceptance = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = sorted(getattr(acceptance, "REPORT_LINES", []), key=lambda s: int(s.split()[2]))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
