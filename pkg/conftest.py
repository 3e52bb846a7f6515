"""
Global pytest configuration and fixtures.
"""

import sys
from pathlib import Path

import pytest

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))


@pytest.fixture
def mock_env(monkeypatch):
    """Isolate tests from the developer's MVSR_* environment and .env file."""
    for name in ("MVSR_THREADS", "MVSR_SEED", "MVSR_FLOAT_WIDTH", "LOG_LEVEL", "LOG_FORMAT"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("MVSR_THREADS", "1")
    monkeypatch.setenv("LOG_LEVEL", "WARNING")
    yield
