import time

import pytest

_START = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    # acceptance criteria run last so the final one can time the whole session
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")


@pytest.fixture(scope="session")
def session_start() -> float:
    return _START
