"""Six-state belief space over (category, action) and its unitary evolution.

States are ordered ``(AG, UG, WG, AB, UB, WB)``: attack / uncertain / withdraw
given a good-guy categorization, then the same three given bad-guy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import check_hermitian, matrix_exponential_unitary, norm_squared

NORM_TOL = 1e-12
PRIOR_TOL = 1e-9
DEFAULT_TIME = math.pi / 2

STATE_LABELS = ("AG", "UG", "WG", "AB", "UB", "WB")
ACTION_LABELS = ("A", "U", "W")


class Category(enum.Enum):
    GOOD = "good"
    BAD = "bad"


def _frozen_amplitudes(amplitudes, length: int) -> np.ndarray:
    a = np.array(amplitudes, dtype=complex).reshape(-1)
    if a.shape != (length,):
        raise ValueError(f"expected {length} amplitudes, got {a.size}")
    n2 = norm_squared(a)
    if abs(n2 - 1.0) > NORM_TOL:
        raise ValueError(f"state is not unit norm: |psi|^2 = {n2!r}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BeliefState:
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen_amplitudes(self.amplitudes, 6))

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class BlockState:
    """Amplitudes over (Attack, Uncertain, Withdraw) within one category."""

    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen_amplitudes(self.amplitudes, 3))

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class HamiltonianParams:
    """Reward parameters of the two category blocks and the deliberation time."""

    h_g: float
    h_b: float
    t: float = field(default=DEFAULT_TIME)

    def __post_init__(self):
        if not (math.isfinite(self.h_g) and math.isfinite(self.h_b)):
            raise ValueError("h_g and h_b must be finite")
        if not math.isfinite(self.t) or self.t < 0:
            raise ValueError(f"t must be finite and non-negative, got {self.t}")


def check_priors(p_g: float, p_b: float, tol: float = PRIOR_TOL) -> None:
    for name, p in (("p_g", p_g), ("p_b", p_b)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} = {p} is not a probability")
    if abs(p_g + p_b - 1.0) > tol:
        raise ValueError(f"priors must sum to 1 (got p_g + p_b = {p_g + p_b!r})")


def uniform_initial_state() -> BeliefState:
    return BeliefState(np.full(6, 1 / math.sqrt(6)))


def initial_state_from_priors(p_g: float, p_b: float) -> BeliefState:
    """Real, within-block uniform state whose block weights are the priors."""
    check_priors(p_g, p_b)
    # renormalise away the 1e-9 slack allowed on the priors
    s = p_g + p_b
    g, b = math.sqrt(p_g / s / 3), math.sqrt(p_b / s / 3)
    return BeliefState([g, g, g, b, b, b])


def _block_slice(c: Category) -> slice:
    return slice(0, 3) if c is Category.GOOD else slice(3, 6)


def condition_on_category(s: BeliefState, c: Category) -> BlockState:
    block = s.amplitudes[_block_slice(Category(c))]
    weight = norm_squared(block)
    if weight == 0.0:
        raise ZeroDivisionError(f"cannot condition on {Category(c).value!r}: block has zero amplitude")
    return BlockState(block / math.sqrt(weight))


def block_weights(s: BeliefState) -> tuple[float, float]:
    p = s.probabilities
    return float(p[:3].sum()), float(p[3:].sum())


def compose_state(p_g: float, good: BlockState, p_b: float, bad: BlockState) -> BeliefState:
    """Weighted superposition ``sqrt(p_g) * good (+) sqrt(p_b) * bad``."""
    check_priors(p_g, p_b)
    return BeliefState(
        np.concatenate([math.sqrt(p_g) * good.amplitudes, math.sqrt(p_b) * bad.amplitudes])
    )


def build_block_hamiltonian(h: float) -> np.ndarray:
    """3x3 generator in (Attack, Uncertain, Withdraw) order.

    The uncertain row/column is ``(0, 1, 0)``: that state only picks up a phase.
    """
    if not math.isfinite(h):
        raise ValueError("h must be finite")
    return np.array([[h, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, -h]])


def build_block_hamiltonians(hs) -> np.ndarray:
    """Stack of block Hamiltonians, shape ``(len(hs), 3, 3)``."""
    hs = np.asarray(hs, dtype=float).reshape(-1)
    H = np.zeros((hs.size, 3, 3))
    H[:, 0, 0] = hs
    H[:, 2, 2] = -hs
    H[:, 0, 2] = H[:, 2, 0] = 1.0
    H[:, 1, 1] = 1.0
    return H


def build_full_hamiltonian(p: HamiltonianParams) -> np.ndarray:
    H = np.zeros((6, 6))
    H[:3, :3] = build_block_hamiltonian(p.h_g)
    H[3:, 3:] = build_block_hamiltonian(p.h_b)
    return H


def evolve(s, H, t: float):
    """Apply ``exp(-i H t)`` to a BeliefState or BlockState."""
    H = check_hermitian(H)
    n = s.amplitudes.shape[0]
    if H.shape != (n, n):
        raise ValueError(f"Hamiltonian of shape {H.shape} does not act on a {n}-state vector")
    U = matrix_exponential_unitary(H, t)
    return type(s)(U @ s.amplitudes)
