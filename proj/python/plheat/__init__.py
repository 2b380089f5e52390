from ._plheat import (
    CSV_HEADER,
    ConfigError,
    Error,
    ErrorReport,
    ExperimentConfig,
    default_config,
    empirical_order,
    mesh_size,
    parse_config,
    read_csv,
    run_study,
    s_flux,
    to_csv,
    v_transform,
)

__all__ = [
    "CSV_HEADER",
    "ConfigError",
    "Error",
    "ErrorReport",
    "ExperimentConfig",
    "default_config",
    "empirical_order",
    "mesh_size",
    "parse_config",
    "read_csv",
    "run_study",
    "s_flux",
    "to_csv",
    "v_transform",
]
