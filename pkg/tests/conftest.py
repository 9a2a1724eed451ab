import os
import sys
from pathlib import Path

import pytest

# Run against the source tree without installation
REPO_ROOT = Path(__file__).resolve().parent.parent
SRC_DIR = REPO_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from davnsim.core.settings_manager import SettingsManager  # noqa: E402


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """No DAVN_* variable from the developer's shell leaks into a test."""
    for key in list(os.environ):
        if key.upper().startswith("DAVN_"):
            monkeypatch.delenv(key, raising=False)
    SettingsManager.reset()
    yield
    SettingsManager.reset()


@pytest.fixture
def default_toml() -> Path:
    return REPO_ROOT / "config" / "default.toml"
