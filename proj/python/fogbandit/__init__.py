"""Adversarial bandit offloading for vehicular fog computing."""

from ._core import (
    ConfigError,
    ContractError,
    ParseError,
    __version__,
    demand_weight,
    eta,
    gamma,
    ix_estimate,
    link_rate,
    parse_policy,
    pathloss_db,
    run_cli,
    run_experiment,
    selection_distribution,
    unit_cost,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "ParseError",
    "__version__",
    "demand_weight",
    "eta",
    "gamma",
    "ix_estimate",
    "link_rate",
    "parse_policy",
    "pathloss_db",
    "run_cli",
    "run_experiment",
    "selection_distribution",
    "unit_cost",
]
