import sys
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if not LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(LINES, key=int):
        terminalreporter.write_line(LINES[name])
