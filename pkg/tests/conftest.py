import pytest

from kanfraud.data import SplitDataset, split, standardize_apply, standardize_fit
from kanfraud.synthetic import make_blobs, make_spline_boundary

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_LINES = []


def scaled_split(data, seed=0):
    parts = split(data, seed=seed)
    scaler, train = standardize_fit(parts.train)
    return SplitDataset(
        train,
        standardize_apply(scaler, parts.valid),
        standardize_apply(scaler, parts.test),
        parts.split_seed,
        parts.fractions,
    )


@pytest.fixture(scope="session")
def spline_split():
    return scaled_split(make_spline_boundary(n=1000, dim=30, seed=0))


@pytest.fixture(scope="session")
def small_split():
    return scaled_split(make_spline_boundary(n=200, dim=6, seed=0))


@pytest.fixture(scope="session")
def blob_split():
    return scaled_split(make_blobs(n=400, dim=4, seed=0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
