"""davnsim - drone-assisted vehicular network dataset simulator"""

from pathlib import Path

__version__ = (Path(__file__).parent / "data" / "version.txt").read_text(encoding="utf-8").strip()
__author__ = "MediaTools Tech"
__description__ = "Queueing, link-budget, propulsion and mobility models for UAV-assisted vehicular datasets"

from .core.errors import DavnError, InputError, ModelDomainError
from .core.scenario_engine import run, validate_dataset
from .core.settings_manager import DavnSettings, SettingsManager, load_settings

__all__ = [
    "DavnError",
    "DavnSettings",
    "InputError",
    "ModelDomainError",
    "SettingsManager",
    "load_settings",
    "run",
    "validate_dataset",
]
