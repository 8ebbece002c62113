import json
from importlib import resources
from pathlib import Path

import pytest

from stargen.campaign import CampaignState, replay
from stargen.manifest import BenchmarkManifest, load_bundled_manifest

TESTS_DIR = Path(__file__).parent
DATA_DIR = TESTS_DIR / "data"


def bundled_bytes(name: str) -> bytes:
    return resources.files("stargen.data").joinpath(name).read_bytes()


@pytest.fixture(scope="session")
def bundled_manifest() -> BenchmarkManifest:
    return load_bundled_manifest()


@pytest.fixture(scope="session")
def main_results_log() -> bytes:
    return bundled_bytes("main_results.stargen.log")


@pytest.fixture(scope="session")
def compositional_log() -> bytes:
    return bundled_bytes("compositional.stargen.log")


@pytest.fixture(scope="session")
def ablations_log() -> bytes:
    return bundled_bytes("carrot_knife_ablations.stargen.log")


@pytest.fixture(scope="session")
def main_results_state(main_results_log) -> CampaignState:
    return replay(main_results_log)


@pytest.fixture(scope="session")
def compositional_state(compositional_log) -> CampaignState:
    return replay(compositional_log)


@pytest.fixture(scope="session")
def table_counts() -> dict:
    return json.loads((DATA_DIR / "table_counts.json").read_text())
