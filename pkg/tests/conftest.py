from pathlib import Path

import pytest

from qoekit import composite

DATA_DIR = Path(__file__).parent / "data"

# Reference elicitation-study values reproduced by the golden tests:
# the published importance matrix and the weight table derived from it.
REFERENCE_MATRIX = [[1, 5.74, 5.48], [0.95, 1, 2.48], [0.67, 1.95, 1]]
PUBLISHED_NORMALIZED = [[0.38, 0.66, 0.61], [0.36, 0.11, 0.28], [0.26, 0.22, 0.11]]
PUBLISHED_WEIGHTS = (0.55, 0.25, 0.20)
CRITERIA = ("loss", "delay", "jitter")


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def model_registry():
    """Snapshot the model registry and restore it after the test."""
    snapshot = dict(composite._REGISTRY)
    yield composite._REGISTRY
    composite._REGISTRY.clear()
    composite._REGISTRY.update(snapshot)
