"""Dense state-vector simulation of qudit superdense coding primitives.

Conventions
-----------
* Party 0 is the most significant digit: ``|j0 j1 ...>`` has index
  ``j0*q**(m-1) + j1*q**(m-2) + ...``.
* ``X|j> = |j+1 mod q>``, ``Z|j> = w**j |j>`` with ``w = exp(2*pi*i/q)``.
  A label ``(a, b)`` applies ``X**a Z**b`` (Z first, then X).
* Bell basis: ``|Phi_{s,t}> = (X**s Z**t (x) I) |Phi>``.
* Two-sender sum box: sender 1 holds party 0, sender 2 holds party 1 of
  ``|Phi>``.  Because ``(I (x) M)|Phi> = (M^T (x) I)|Phi>`` the receiver
  decodes ``(s, t) = (a1 - a2 mod q, b1 + b2 mod q)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

NORM_TOL = 1e-12
DETERMINISTIC_TOL = 1e-10


def omega(q: int) -> complex:
    return np.exp(2j * np.pi / q)


def _check_q(q: int) -> None:
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or q < 2:
        raise ValueError(f"local dimension q must be an integer >= 2, got {q!r}")


@dataclass(frozen=True, eq=False)
class PureState:
    q: int
    parties: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        _check_q(self.q)
        if self.parties < 1:
            raise ValueError("need at least one party")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.q ** self.parties,):
            raise ValueError(f"expected {self.q ** self.parties} amplitudes, got shape {amps.shape}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (squared norm {norm})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, q: int, digits: Sequence[int]) -> "PureState":
        amps = np.zeros(q ** len(digits), dtype=complex)
        amps[np.ravel_multi_index(tuple(digits), (q,) * len(digits))] = 1.0
        return cls(q, len(digits), amps)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class WeylLabel:
    a: int
    b: int

    def check(self, q: int) -> "WeylLabel":
        if not (0 <= self.a < q and 0 <= self.b < q):
            raise ValueError(f"Weyl label {self} out of range for q={q}")
        return self


@dataclass(frozen=True)
class BellOutcome:
    s: int
    t: int
    probability: float


@dataclass(frozen=True)
class Ensemble:
    members: tuple[tuple[float, PureState], ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("empty ensemble")
        shape = (self.members[0][1].q, self.members[0][1].parties)
        for p, st in self.members:
            if p <= 0:
                raise ValueError("ensemble probabilities must be positive")
            if (st.q, st.parties) != shape:
                raise ValueError("ensemble members must share q and party count")
        total = sum(p for p, _ in self.members)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"ensemble probabilities sum to {total}")

    @classmethod
    def uniform(cls, states: Sequence[PureState]) -> "Ensemble":
        p = 1.0 / len(states)
        return cls(tuple((p, st) for st in states))


def max_entangled(q: int) -> PureState:
    _check_q(q)
    amps = np.zeros(q * q, dtype=complex)
    amps[[j * q + j for j in range(q)]] = 1.0 / np.sqrt(q)
    return PureState(q, 2, amps)


def weyl_apply(state: PureState, party: int, label: WeylLabel) -> PureState:
    """Apply ``X**a Z**b`` to one party of ``state``."""
    q, m = state.q, state.parties
    if not 0 <= party < m:
        raise ValueError(f"party {party} out of range for {m} parties")
    label.check(q)
    tensor = state.amplitudes.reshape((q,) * m)
    phases = omega(q) ** (label.b * np.arange(q))
    shape = [1] * m
    shape[party] = q
    tensor = tensor * phases.reshape(shape)
    tensor = np.roll(tensor, label.a, axis=party)
    return PureState(q, m, tensor.reshape(-1))


def bell_state(q: int, s: int, t: int) -> PureState:
    return weyl_apply(max_entangled(q), 0, WeylLabel(s, t))


def bell_measure(state: PureState) -> list[BellOutcome]:
    """Full outcome distribution of a generalized Bell measurement, ordered by (s, t)."""
    if state.parties != 2:
        raise ValueError(f"Bell measurement needs a two-party state, got {state.parties}")
    q = state.q
    out = []
    for s, t in itertools.product(range(q), repeat=2):
        amp = bell_state(q, s, t).overlap(state)
        out.append(BellOutcome(s, t, float(abs(amp) ** 2)))
    return out


def most_likely(outcomes: Sequence[BellOutcome]) -> BellOutcome:
    return max(outcomes, key=lambda o: o.probability)


def is_deterministic(outcomes: Sequence[BellOutcome], tol: float = DETERMINISTIC_TOL) -> bool:
    return most_likely(outcomes).probability >= 1.0 - tol


def superdense_receiver(q: int, message: WeylLabel) -> BellOutcome:
    """Encode ``message`` on the sender's half of ``|Phi>`` and Bell-measure at the receiver."""
    _check_q(q)
    encoded = weyl_apply(max_entangled(q), 0, message)
    return most_likely(bell_measure(encoded))


def sumbox_state(q: int, m1: WeylLabel, m2: WeylLabel) -> PureState:
    state = weyl_apply(max_entangled(q), 0, m1)
    return weyl_apply(state, 1, m2)


def two_sender_sumbox(q: int, m1: WeylLabel, m2: WeylLabel) -> BellOutcome:
    """Two senders share ``|Phi>``, each encodes one label, the receiver Bell-measures both qudits."""
    _check_q(q)
    return most_likely(bell_measure(sumbox_state(q, m1, m2)))


def sumbox_prediction(q: int, m1: WeylLabel, m2: WeylLabel) -> tuple[int, int]:
    return ((m1.a - m2.a) % q, (m1.b + m2.b) % q)


def von_neumann_entropy(rho: np.ndarray, base: float) -> float:
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > 1e-15]
    return float(-np.sum(evals * np.log(evals)) / np.log(base))


def holevo_chi(ensemble: Ensemble, log_base: int) -> float:
    """Holevo quantity S(avg rho) - sum_x p_x S(rho_x), in units of ``log_base``."""
    if log_base < 2:
        raise ValueError("log base must be >= 2")
    avg = sum(p * st.density() for p, st in ensemble.members)
    inner = sum(p * von_neumann_entropy(st.density(), log_base) for p, st in ensemble.members)
    return von_neumann_entropy(avg, log_base) - inner


def all_labels(q: int) -> list[WeylLabel]:
    return [WeylLabel(a, b) for a, b in itertools.product(range(q), repeat=2)]
