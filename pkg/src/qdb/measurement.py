"""Diagonal measurement operators, the uncertain-state split and the pignistic transform."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

PROB_TOL = 1e-10
MASS_TOL = 1e-12

# weight the uncertain probability carries into the attack response
CD_UNCERTAIN_WEIGHT = 0.25  # C-D: amplitude coefficient 0.5, squared
D_ALONE_UNCERTAIN_WEIGHT = 0.5  # D-alone: amplitude coefficient 1/sqrt(2), squared


@dataclass(frozen=True)
class MeasurementOperator:
    """Diagonal projector-like operator given by amplitude-level coefficients."""

    diagonal: tuple[float, ...]

    def __post_init__(self):
        d = tuple(float(c) for c in self.diagonal)
        if len(d) not in (3, 6):
            raise ValueError(f"measurement operator must be 3 or 6 wide, got {len(d)}")
        bad = [c for c in d if not 0.0 <= c <= 1.0]
        if bad:
            raise ValueError(f"coefficients must lie in [0, 1], got {bad}")
        object.__setattr__(self, "diagonal", d)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)

    def __add__(self, other: "MeasurementOperator") -> "MeasurementOperator":
        return MeasurementOperator(tuple(a + b for a, b in zip(self.diagonal, other.diagonal, strict=True)))

    def scaled(self, k: float) -> "MeasurementOperator":
        return MeasurementOperator(tuple(k * c for c in self.diagonal))

    def tiled(self) -> "MeasurementOperator":
        """The same operator applied to both category blocks of a 6-state vector."""
        if len(self.diagonal) != 3:
            raise ValueError("only a 3-wide operator can be tiled")
        return MeasurementOperator(self.diagonal * 2)


ATTACK = MeasurementOperator((1.0, 0.0, 0.0))
UNCERTAIN = MeasurementOperator((0.0, 1.0, 0.0))
WITHDRAW = MeasurementOperator((0.0, 0.0, 1.0))


def cd_measurement_operator() -> MeasurementOperator:
    """Attack plus half-amplitude uncertain, used after an explicit categorization."""
    return ATTACK + UNCERTAIN.scaled(0.5)


def d_alone_measurement_operator() -> MeasurementOperator:
    return ATTACK + UNCERTAIN.scaled(1 / math.sqrt(2))


def uncertain_weight_operator(w: float) -> MeasurementOperator:
    """Operator whose squared norm reports ``P(attack) + w * P(uncertain)``."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"uncertain weight must be in [0, 1], got {w}")
    return ATTACK + UNCERTAIN.scaled(math.sqrt(w))


@dataclass(frozen=True)
class ActionProbabilities:
    attack: float
    uncertain: float
    withdraw: float

    def __post_init__(self):
        for name in ("attack", "uncertain", "withdraw"):
            p = getattr(self, name)
            if not -PROB_TOL <= p <= 1 + PROB_TOL:
                raise ValueError(f"{name} = {p} is not a probability")
        total = self.attack + self.uncertain + self.withdraw
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"action probabilities sum to {total!r}, not 1")


def _amplitudes(s) -> np.ndarray:
    return np.asarray(getattr(s, "amplitudes", s), dtype=complex)


def measure_probability(s, M: MeasurementOperator) -> float:
    """``||M s||^2`` for a diagonal ``M``."""
    a = _amplitudes(s)
    c = np.asarray(M.diagonal)
    if a.shape != c.shape:
        raise ValueError(f"operator of width {c.size} cannot measure a {a.size}-state vector")
    return float(np.sum(c**2 * (a.real**2 + a.imag**2)))


def action_probabilities(s) -> ActionProbabilities:
    p = np.abs(_amplitudes(s)) ** 2
    if p.shape != (3,):
        raise ValueError("action probabilities need a 3-state block")
    return ActionProbabilities(float(p[0]), float(p[1]), float(p[2]))


def reported_conditional_attack(a: ActionProbabilities, w_cd: float = CD_UNCERTAIN_WEIGHT) -> float:
    return a.attack + w_cd * a.uncertain


def split_uncertain(p_u: float) -> tuple[float, float]:
    """Share uncertain mass equally between attack and withdraw."""
    if not 0.0 <= p_u <= 1.0:
        raise ValueError(f"p_u = {p_u} is not a probability")
    return 0.5 * p_u, 0.5 * p_u


class MassFunction:
    """Basic probability assignment over non-empty subsets of a finite frame.

    >>> m = MassFunction({("A",): 0.4, ("A", "W"): 0.6})
    >>> pignistic_transform(m)
    {'A': 0.7, 'W': 0.3}
    """

    def __init__(self, masses: Mapping[Iterable[str], float] | Iterable[tuple[Iterable[str], float]],
                 frame: Iterable[str] | None = None):
        items = masses.items() if isinstance(masses, Mapping) else masses
        acc: dict[frozenset, float] = {}
        for subset, mass in items:
            key = frozenset([subset] if isinstance(subset, str) else subset)
            if not key:
                raise ValueError("mass assigned to the empty set")
            mass = float(mass)
            if not math.isfinite(mass) or mass < 0:
                raise ValueError(f"mass of {sorted(key)} must be a non-negative number, got {mass}")
            acc[key] = acc.get(key, 0.0) + mass
        union = frozenset().union(*acc) if acc else frozenset()
        self.frame = frozenset(frame) if frame is not None else union
        if not union <= self.frame:
            raise ValueError(f"focal elements {sorted(union - self.frame)} lie outside the frame")
        total = math.fsum(acc.values())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1")
        self.masses = acc

    def __repr__(self):
        body = ", ".join(f"{{{','.join(sorted(k))}}}: {v:g}" for k, v in self.masses.items())
        return f"MassFunction({body})"


def pignistic_transform(m: MassFunction) -> dict[str, float]:
    """Spread every focal mass evenly over its elements; keys come out sorted."""
    bet = {x: [] for x in sorted(m.frame)}
    for subset, mass in m.masses.items():
        share = mass / len(subset)
        for x in subset:
            bet[x].append(share)
    return {x: math.fsum(parts) for x, parts in bet.items()}
