import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lipvessel import kernels  # noqa: E402

ACCEPTANCE_REPORT = []


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    with kernels.use_backend(request.param):
        yield request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, detail in ACCEPTANCE_REPORT:
        line = f"[{status}] {name}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
