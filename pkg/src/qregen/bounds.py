"""Exact cut-set bounds for classical and entanglement-assisted regenerating codes.

Everything here works on :class:`fractions.Fraction` values.  Floats are
rejected at the boundary so that points such as ``7/22`` or ``7/67`` compare
exactly.

Both tradeoffs have the same shape::

    sum_{i=0}^{k-1} min(f_i(beta), alpha) >= B

with per-term ceilings ``f_i(beta) = c_i * beta`` where

* classical: ``c_i = d - i``
* quantum:   ``c_i = min(2 * (d - i), d)``

so every inversion below reduces to water-filling over the coefficients
``c_i``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional, Union

RationalLike = Union[int, Fraction, str]

__all__ = [
    "Mode",
    "ParameterError",
    "SystemParams",
    "OperatingPoint",
    "RegenPoint",
    "TradeoffCurve",
    "as_fraction",
    "term_coefficients",
    "capacity",
    "classical_capacity",
    "quantum_capacity",
    "is_feasible",
    "min_alpha",
    "min_beta",
    "msr_point",
    "mbr_point",
    "qmsr_point",
    "qmbr_point",
    "msr_bandwidth_ratio",
    "mbr_bandwidth_ratio",
    "points_coincide",
    "tradeoff_curve",
]


class ParameterError(ValueError):
    """Raised for (n, k, d, B) or operating-point values outside their domain."""


class Mode(str, enum.Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"

    @classmethod
    def parse(cls, value: Union["Mode", str]) -> "Mode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"unknown mode {value!r}; expected 'classical' or 'quantum'") from None


def as_fraction(value: RationalLike, name: str = "value") -> Fraction:
    """Convert ``value`` to a Fraction, refusing floats and bools."""
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"{name} must be an exact rational (int, Fraction or 'p/q' string), got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            raise ParameterError(f"cannot parse {name}={value!r} as a rational") from None
    raise TypeError(f"{name} must be rational, got {type(value).__name__}")


@dataclass(frozen=True)
class SystemParams:
    """An (n, k, d) storage system holding a file of ``B`` dits."""

    n: int
    k: int
    d: int
    B: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        for name in ("n", "k", "d"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ParameterError(f"{name} must be an integer, got {value!r}")
        object.__setattr__(self, "B", as_fraction(self.B, "B"))
        n, k, d = self.n, self.k, self.d
        if not 1 <= k <= n:
            raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
        if not k <= d <= n - 1:
            raise ParameterError(f"need k <= d <= n-1, got k={k}, d={d}, n={n}")
        if self.B <= 0:
            raise ParameterError(f"file size B must be positive, got {self.B}")


@dataclass(frozen=True)
class OperatingPoint:
    """Per-node storage ``alpha`` and per-helper bandwidth ``beta``.

    ``beta`` is in dits for classical repair and qudits for quantum repair.
    """

    alpha: Fraction
    beta: Fraction
    mode: Mode = Mode.CLASSICAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_fraction(self.alpha, "alpha"))
        object.__setattr__(self, "beta", as_fraction(self.beta, "beta"))
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.alpha < 0 or self.beta < 0:
            raise ParameterError(f"alpha and beta must be nonnegative, got {self.alpha}, {self.beta}")


@dataclass(frozen=True)
class RegenPoint:
    alpha: Fraction
    total_bandwidth: Fraction
    per_helper: Fraction
    label: str

    def as_pair(self) -> tuple[Fraction, Fraction]:
        """``(alpha, d*beta)``, the form in which the points are usually quoted."""
        return (self.alpha, self.total_bandwidth)


@dataclass(frozen=True)
class TradeoffCurve:
    """Piecewise-linear minimal storage as a function of total repair bandwidth.

    ``breakpoints`` run from the minimum-bandwidth end to the minimum-storage
    end as ``(gamma, alpha)`` pairs with ``gamma = d * beta``.  Beyond the last
    breakpoint the curve is flat at ``alpha = B/k``.
    """

    mode: Mode
    breakpoints: tuple[tuple[Fraction, Fraction], ...]
    feasible_gamma_min: Fraction

    def alpha_at(self, gamma: RationalLike) -> Optional[Fraction]:
        """Minimal alpha at total bandwidth ``gamma``; None below the feasible range."""
        gamma = as_fraction(gamma, "gamma")
        pts = self.breakpoints
        if gamma < pts[0][0]:
            return None
        if gamma >= pts[-1][0]:
            return pts[-1][1]
        for (g0, a0), (g1, a1) in zip(pts, pts[1:]):
            if g0 <= gamma <= g1:
                return a0 + (a1 - a0) * (gamma - g0) / (g1 - g0)
        raise AssertionError("unreachable: breakpoints must be sorted")

    def sample(self, per_segment: int) -> list[tuple[Fraction, Fraction]]:
        """Breakpoints plus ``per_segment`` evenly spaced interior points per segment."""
        if per_segment < 0:
            raise ParameterError("samples per segment must be >= 0")
        pts = self.breakpoints
        out = [pts[0]]
        for (g0, a0), (g1, a1) in zip(pts, pts[1:]):
            for j in range(1, per_segment + 1):
                t = Fraction(j, per_segment + 1)
                out.append((g0 + t * (g1 - g0), a0 + t * (a1 - a0)))
            out.append((g1, a1))
        return out


def term_coefficients(params: SystemParams, mode: Union[Mode, str]) -> list[int]:
    """Integer slopes ``c_i`` with ``f_i(beta) = c_i * beta``, i = 0..k-1."""
    mode = Mode.parse(mode)
    d = params.d
    if mode is Mode.CLASSICAL:
        return [d - i for i in range(params.k)]
    return [min(2 * (d - i), d) for i in range(params.k)]


def capacity(params: SystemParams, alpha: RationalLike, beta: RationalLike, mode: Union[Mode, str]) -> Fraction:
    """Left-hand side of the cut-set bound for the given mode."""
    alpha = as_fraction(alpha, "alpha")
    beta = as_fraction(beta, "beta")
    if alpha < 0 or beta < 0:
        raise ParameterError("alpha and beta must be nonnegative")
    return sum((min(c * beta, alpha) for c in term_coefficients(params, mode)), Fraction(0))


def classical_capacity(params: SystemParams, point: OperatingPoint) -> Fraction:
    if point.mode is not Mode.CLASSICAL:
        raise ParameterError("classical_capacity needs a classical operating point")
    return capacity(params, point.alpha, point.beta, Mode.CLASSICAL)


def quantum_capacity(params: SystemParams, point: OperatingPoint) -> Fraction:
    if point.mode is not Mode.QUANTUM:
        raise ParameterError("quantum_capacity needs a quantum operating point")
    return capacity(params, point.alpha, point.beta, Mode.QUANTUM)


def is_feasible(params: SystemParams, point: OperatingPoint) -> bool:
    return capacity(params, point.alpha, point.beta, point.mode) >= params.B


def min_alpha(params: SystemParams, beta: RationalLike, mode: Union[Mode, str]) -> Optional[Fraction]:
    """Smallest alpha meeting the bound at fixed ``beta``, or None if none does.

    With the ceilings sorted ascending, the capacity is ``P_j + (k - j) * alpha``
    while alpha lies between the j-th and (j+1)-th ceiling (``P_j`` is the sum
    of the j smallest).  Walk the segments and solve on the first one that
    reaches B.
    """
    beta = as_fraction(beta, "beta")
    if beta < 0:
        raise ParameterError("beta must be nonnegative")
    ceilings = sorted(c * beta for c in term_coefficients(params, mode))
    if sum(ceilings) < params.B:
        return None
    k = params.k
    prefix = Fraction(0)
    for j, ceiling in enumerate(ceilings):
        alpha = (params.B - prefix) / (k - j)
        if alpha <= ceiling:
            return alpha
        prefix += ceiling
    raise AssertionError("unreachable: total ceiling >= B guarantees a segment")


def min_beta(params: SystemParams, alpha: RationalLike, mode: Union[Mode, str]) -> Optional[Fraction]:
    """Smallest beta meeting the bound at fixed ``alpha``, or None if ``k*alpha < B``.

    Terms saturate (reach alpha) in decreasing order of slope, at
    ``beta = alpha / c``.  With j terms saturated the capacity is
    ``j * alpha + beta * S_j`` where ``S_j`` sums the unsaturated slopes.
    """
    alpha = as_fraction(alpha, "alpha")
    if alpha < 0:
        raise ParameterError("alpha must be nonnegative")
    B = params.B
    if params.k * alpha < B:
        return None
    slopes = sorted(term_coefficients(params, mode), reverse=True)
    remaining = sum(slopes)
    for j, c in enumerate(slopes):
        # capacity at the moment term j saturates
        if j * alpha + (alpha / c) * remaining >= B:
            return (B - j * alpha) / remaining
        remaining -= c
    raise AssertionError("unreachable: k*alpha >= B guarantees a segment")


def _regen(params: SystemParams, alpha: Fraction, total: Fraction, label: str) -> RegenPoint:
    return RegenPoint(alpha=alpha, total_bandwidth=total, per_helper=total / params.d, label=label)


def msr_point(params: SystemParams) -> RegenPoint:
    B, k, d = params.B, params.k, params.d
    alpha = B / k
    return _regen(params, alpha, alpha * Fraction(d, d - k + 1), "MSR")


def mbr_point(params: SystemParams) -> RegenPoint:
    B, k, d = params.B, params.k, params.d
    alpha = 2 * B * d / (2 * k * d - k * k + k)
    return _regen(params, alpha, alpha, "MBR")


def _coincidence_regime(k: int, d: int) -> bool:
    # Boundary d == 2k-2 uses this branch; both formulas agree there.
    return d >= 2 * k - 2


def qmsr_point(params: SystemParams) -> RegenPoint:
    B, k, d = params.B, params.k, params.d
    alpha = B / k
    if _coincidence_regime(k, d):
        return _regen(params, alpha, alpha, "QMSR")
    return _regen(params, alpha, B * d / (2 * k * (d - k + 1)), "QMSR")


def _qmbr_denominator(k: int, d: int) -> int:
    h = d // 2
    return d * (h + 1) + (2 * d - k - h) * (k - h - 1)


def qmbr_point(params: SystemParams) -> RegenPoint:
    B, k, d = params.B, params.k, params.d
    if _coincidence_regime(k, d):
        alpha = B / k
    else:
        alpha = d * B / _qmbr_denominator(k, d)
    return _regen(params, alpha, alpha, "QMBR")


def _check_kd(k: int, d: int) -> None:
    if k < 1 or d < k:
        raise ParameterError(f"need 1 <= k <= d, got k={k}, d={d}")


def msr_bandwidth_ratio(k: int, d: int) -> Fraction:
    """Per-helper bandwidth at QMSR divided by that at MSR."""
    _check_kd(k, d)
    return max(1 - Fraction(k - 1, d), Fraction(1, 2))


def mbr_bandwidth_ratio(k: int, d: int) -> Fraction:
    """Per-helper bandwidth at QMBR divided by that at MBR."""
    _check_kd(k, d)
    if _coincidence_regime(k, d):
        return 1 - Fraction(k - 1, 2 * d)
    return Fraction(k * (2 * d - k + 1), 2 * _qmbr_denominator(k, d))


def points_coincide(params: SystemParams) -> bool:
    return _coincidence_regime(params.k, params.d)


def tradeoff_curve(params: SystemParams, mode: Union[Mode, str]) -> TradeoffCurve:
    """Exact minimal-storage curve between the bandwidth-first and storage-first points.

    With slopes sorted ascending and ``P_j`` the sum of the first j, the active
    set changes at ``beta_j = B / (P_j + (k - j) * c_{j+1})`` where
    ``alpha = c_{j+1} * beta_j``.  j = k-1 is the minimum-bandwidth end and
    j = 0 the minimum-storage end.  Tied slopes give repeated points, which
    are merged.
    """
    mode = Mode.parse(mode)
    B, k, d = params.B, params.k, params.d
    slopes = sorted(term_coefficients(params, mode))
    points: list[tuple[Fraction, Fraction]] = []
    prefix = 0
    for j, c in enumerate(slopes):
        beta = B / (prefix + (k - j) * c)
        points.append((d * beta, c * beta))
        prefix += c
    points.sort()
    merged: list[tuple[Fraction, Fraction]] = []
    for p in points:
        if not merged or merged[-1] != p:
            merged.append(p)
    return TradeoffCurve(mode=mode, breakpoints=tuple(merged), feasible_gamma_min=merged[0][0])
