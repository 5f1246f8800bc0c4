import json

import pytest

from _fixture import GOLDEN_JSON, load_fixture

from evidencelab import AnalysisConfig


@pytest.fixture(scope="session")
def fixture_dataset():
    return load_fixture()


@pytest.fixture(scope="session")
def default_config():
    return AnalysisConfig()


@pytest.fixture(scope="session")
def golden():
    return json.loads(GOLDEN_JSON.read_text(encoding="utf-8"))
