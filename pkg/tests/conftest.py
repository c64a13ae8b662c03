"""
Pytest configuration for headmotion tests.

Full-pipeline, realtime-socket and CLI end-to-end tests are marked ``slow``.
They run by default; skip them for a quick pass with:

    HEADMOTION_SKIP_SLOW=1 pytest tests/

The library reads HEADMOTION_* variables at load_settings() time, so every
test starts from a clean environment for those variables.
"""

import os

import pytest

SKIP_SLOW = os.environ.get("HEADMOTION_SKIP_SLOW", "0") == "1"


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "slow: full-pipeline and realtime tests (skip with HEADMOTION_SKIP_SLOW=1)"
    )


def pytest_collection_modifyitems(config, items):
    """Skip slow tests when HEADMOTION_SKIP_SLOW=1."""
    if SKIP_SLOW:
        skip_slow = pytest.mark.skip(reason="HEADMOTION_SKIP_SLOW=1")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def clean_headmotion_env(monkeypatch):
    """Unset every HEADMOTION_* variable a developer may have exported."""
    from headmotion.config import ENV_VARS

    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)
