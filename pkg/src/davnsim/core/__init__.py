from .errors import DavnError, InputError, ModelDomainError
from .queueing import analyze_priority_queue
from .scenario_engine import ScenarioEngine, run
from .settings_manager import SettingsManager

__all__ = [
    "DavnError",
    "InputError",
    "ModelDomainError",
    "ScenarioEngine",
    "SettingsManager",
    "analyze_priority_queue",
    "run",
]
