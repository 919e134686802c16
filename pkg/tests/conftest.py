import sys
from pathlib import Path

import pytest

# make tests/helpers.py importable regardless of invocation directory
sys.path.insert(0, str(Path(__file__).parent))

from flowsim.pipeline import PipelineConfig
from flowsim.synth import generate_corpus


@pytest.fixture(scope="session")
def fixed_cfg() -> PipelineConfig:
    """Pipeline config with a fixed threshold for reproducible tests."""
    return PipelineConfig(fixed_threshold=128)


@pytest.fixture(scope="session")
def small_corpus():
    """Ten flowchart figures shared by the slower integration tests."""
    return generate_corpus(11, 10)
