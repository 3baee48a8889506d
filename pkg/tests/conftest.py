import pytest

from tropimirror import examples

# criterion number -> (verdict, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def lp2():
    return examples.local_p2(0.01)


@pytest.fixture(scope="session")
def trap():
    return examples.trapezoid()


@pytest.fixture(scope="session")
def tri():
    return examples.single_triangle()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        verdict, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {verdict}  {detail}")
