"""Link-level simulator for a full-duplex MIMO node with hybrid A/D SI cancellation."""

from .errors import ConfigError, InvalidInputError, NumericalError
from .simulator import RunResult, SimConfig, SweepResult, load_config, make_config, monte_carlo, run_once

__all__ = [
    "ConfigError",
    "InvalidInputError",
    "NumericalError",
    "RunResult",
    "SimConfig",
    "SweepResult",
    "load_config",
    "make_config",
    "monte_carlo",
    "run_once",
]

__version__ = "0.1.0"
