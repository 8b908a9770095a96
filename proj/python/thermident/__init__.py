# SPDX-License-Identifier: Apache-2.0
"""Grey-box RC and Almon-lag thermal model identification."""

from ._thermident import (
    CellFit,
    ConfigError,
    DataFormatError,
    Dataset,
    Error,
    InvalidArgument,
    RankDeficientError,
    ScenarioConfig,
    almon_basis,
    average_accuracy,
    degree_days,
    estimate,
    evaluate_cell,
    fit_cell,
    generate_scenario,
    load_config,
    objective,
    parse_config,
    power_sample,
    read_dataset,
    run_command,
    simulate,
    test_window,
    training_window,
    truth_params,
    write_dataset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
