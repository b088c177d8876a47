"""Recurrence and transience of time-inhomogeneous birth-and-death walks."""

from ._core import (
    ChainSpec,
    ConfigError,
    DomainError,
    DriftFunction,
    Label,
    NotNormalizable,
    ScanSettings,
    Verdict,
    __version__,
    classify_diagonal,
    classify_ratio,
    classify_series,
    example,
    example_config,
    expected_returns,
    hit_probability,
    parse_config,
    simulate,
    stationary,
    sweep,
)

__all__ = [
    "ChainSpec",
    "ConfigError",
    "DomainError",
    "DriftFunction",
    "Label",
    "NotNormalizable",
    "ScanSettings",
    "Verdict",
    "classify_diagonal",
    "classify_ratio",
    "classify_series",
    "example",
    "example_config",
    "expected_returns",
    "hit_probability",
    "parse_config",
    "simulate",
    "stationary",
    "sweep",
]
