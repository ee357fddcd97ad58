import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from derm2vec.data import drop_missing, encode_features, parse_dataset, default_data_path  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def records():
    return drop_missing(parse_dataset(default_data_path()))


@pytest.fixture(scope="session")
def deep_matrix(records):
    return encode_features(records, "minmax")


@pytest.fixture(scope="session")
def raw_matrix(records):
    return encode_features(records, "none")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from _acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
