import pytest

from xsurv import load_bundled, make_tree


@pytest.fixture(scope="session")
def fig1():
    return load_bundled("fig1")


@pytest.fixture(scope="session")
def fig1_inst(fig1):
    return fig1[0]


@pytest.fixture(scope="session")
def fig1_trees(fig1_inst):
    lam1 = make_tree(fig1_inst, {(1, 2): (1, 5, 2), (1, 3): (1, 4, 6, 3), (3, 4): (4, 6, 3)})
    lam2 = make_tree(fig1_inst, {(1, 2): (1, 5, 2), (2, 4): (2, 3, 6, 4), (3, 4): (4, 6, 3)})
    return lam1, lam2


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, format_line

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for i in sorted(RESULTS):
            terminalreporter.write_line(format_line(i))
