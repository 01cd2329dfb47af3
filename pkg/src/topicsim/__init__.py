"""Multi-topic opinion dynamics on a social graph with language-model or rule-based agents."""

from .core import Ablations, ConfigError, CorrelationSpec, LLMSettings, SimulationConfig, TopicConfig, load_config
from .runner import RunAborted, Simulation, preset_scenarios, run_experiment, run_simulation

__all__ = [
    "Ablations",
    "ConfigError",
    "CorrelationSpec",
    "LLMSettings",
    "RunAborted",
    "Simulation",
    "SimulationConfig",
    "TopicConfig",
    "load_config",
    "preset_scenarios",
    "run_experiment",
    "run_simulation",
]

__version__ = "0.1.0"
