"""Vehicle detection over synchronous-transmission floods (C++ core)."""

from ._liver import (
    Config,
    ConfigError,
    LiverError,
    Model,
    Schedule,
    evaluate,
    experiment_rows,
    feature_names,
    flood_disc,
    generate_traffic,
    run_sweep,
    run_sweep_to_dir,
    train,
    version,
)

__version__ = version()

__all__ = [
    "Config",
    "ConfigError",
    "LiverError",
    "Model",
    "Schedule",
    "evaluate",
    "experiment_rows",
    "feature_names",
    "flood_disc",
    "generate_traffic",
    "run_sweep",
    "run_sweep_to_dir",
    "train",
    "version",
]
