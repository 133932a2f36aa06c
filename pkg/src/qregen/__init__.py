"""Storage/repair-bandwidth tradeoffs for classical and entanglement-assisted regenerating codes."""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    Mode,
    OperatingPoint,
    ParameterError,
    RegenPoint,
    SystemParams,
    TradeoffCurve,
    capacity,
    classical_capacity,
    is_feasible,
    mbr_bandwidth_ratio,
    mbr_point,
    min_alpha,
    min_beta,
    msr_bandwidth_ratio,
    msr_point,
    points_coincide,
    qmbr_point,
    qmsr_point,
    quantum_capacity,
    tradeoff_curve,
)

__all__ = [
    "Mode",
    "OperatingPoint",
    "ParameterError",
    "RegenPoint",
    "SystemParams",
    "TradeoffCurve",
    "capacity",
    "classical_capacity",
    "is_feasible",
    "mbr_bandwidth_ratio",
    "mbr_point",
    "min_alpha",
    "min_beta",
    "msr_bandwidth_ratio",
    "msr_point",
    "points_coincide",
    "qmbr_point",
    "qmsr_point",
    "quantum_capacity",
    "tradeoff_curve",
]
