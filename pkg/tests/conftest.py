import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eigentropy.model import preset  # noqa: E402
from eigentropy.spectrum import solve  # noqa: E402

ACCEPTANCE_LOG: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def boson16():
    return solve(preset("nonintegrable", 16, 6, "boson", 1))


@pytest.fixture(scope="session")
def boson16_integrable():
    return solve(preset("integrable", 16, 6, "boson", 1))


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("eig-cache")


@pytest.fixture(scope="session")
def sweep_csv(tmp_path_factory, cache_dir):
    from eigentropy.experiment import load_config, run_fluctuations

    out = tmp_path_factory.mktemp("sweep")
    cfg = load_config(preset="scaling-sweep", cache_dir=str(cache_dir), out_dir=str(out))
    return run_fluctuations(cfg)
