import pytest

from vpwave import kernels

ACCEPTANCE_LINES = []


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    module = kernels.available_backends()[request.param]
    for name in ("j0", "poly_dd", "frobenius_start", "shoot"):
        monkeypatch.setattr(kernels, name, getattr(module, name))
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
