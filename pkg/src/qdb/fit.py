"""QDB predictions for both conditions, the Markov baseline, and fitting of h_G / h_B."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .dynamics import (
    DEFAULT_TIME,
    BlockState,
    Category,
    HamiltonianParams,
    build_block_hamiltonian,
    build_block_hamiltonians,
    build_full_hamiltonian,
    check_priors,
    condition_on_category,
    evolve,
    initial_state_from_priors,
)
from .linalg import matrix_exponential_unitary
from .measurement import (
    CD_UNCERTAIN_WEIGHT,
    D_ALONE_UNCERTAIN_WEIGHT,
    action_probabilities,
    measure_probability,
    reported_conditional_attack,
    uncertain_weight_operator,
)

H_RANGE = (-10.0, 10.0)
GRID_STEP = 1e-3
GOLDEN_TOL = 1e-10
TIE_TOL = 1e-12
CLAMP_RESIDUAL = 1e-6

_UNIFORM_BLOCK = np.full(3, 1 / math.sqrt(3))


class FitWarning(UserWarning):
    """A target conditional could not be matched within CLAMP_RESIDUAL."""


@dataclass(frozen=True)
class Prediction:
    p_attack_given_good: float
    p_attack_given_bad: float
    p_uncertain_given_good: float
    p_uncertain_given_bad: float
    p_total_cd: float
    p_attack_d_alone: float

    @property
    def interference(self) -> float:
        return self.p_attack_d_alone - self.p_total_cd


@dataclass(frozen=True)
class FittedModel:
    params: HamiltonianParams
    residual_good: float
    residual_bad: float
    prediction: Prediction

    @property
    def clamped(self) -> bool:
        return max(self.residual_good, self.residual_bad) > CLAMP_RESIDUAL


def _uniform_block() -> BlockState:
    return BlockState(_UNIFORM_BLOCK)


def qdb_conditional(h: float, t: float = DEFAULT_TIME, w: float = CD_UNCERTAIN_WEIGHT) -> float:
    """Reported P(attack | category) after deliberating for ``t`` under reward parameter ``h``."""
    evolved = evolve(_uniform_block(), build_block_hamiltonian(h), t)
    return reported_conditional_attack(action_probabilities(evolved), w)


def closed_form_conditional(h: float, w: float = CD_UNCERTAIN_WEIGHT) -> float:
    """Analytic value of ``qdb_conditional(h, pi/2, w)``.

    The attack/withdraw pair evolves under ``K = [[h, 1], [1, -h]]`` with
    ``K^2 = (1 + h^2) I``, so ``exp(-iKt) = cos(lt) I - i sin(lt) K / l`` with
    ``l = sqrt(1 + h^2)``. Starting from amplitudes ``(1, 1) / sqrt(3)`` this
    gives attack probability ``(cos^2 + sin^2 (1 + h)^2 / l^2) / 3``. The
    uncertain amplitude only gains a phase, so it keeps probability 1/3.
    """
    lam = math.sqrt(1.0 + h * h)
    c = math.cos(lam * math.pi / 2)
    s = math.sin(lam * math.pi / 2)
    return w / 3 + (c * c + s * s * (1.0 + h) ** 2 / lam**2) / 3


def action_probability_grid(hs, t: float = DEFAULT_TIME) -> tuple[np.ndarray, np.ndarray]:
    """Attack and uncertain probabilities for each ``h`` in ``hs`` (vectorised)."""
    U = matrix_exponential_unitary(build_block_hamiltonians(hs), t)
    p = np.abs(U @ _UNIFORM_BLOCK) ** 2
    return p[:, 0], p[:, 1]


def _grid(h_range: tuple[float, float], step: float) -> np.ndarray:
    lo, hi = map(float, h_range)
    if not hi > lo:
        raise ValueError(f"empty h range {h_range}")
    if not step > 0:
        raise ValueError("grid step must be positive")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.linspace(lo, lo + (n - 1) * step, n)


@lru_cache(maxsize=16)
def _cached_grid(t: float, lo: float, hi: float, step: float):
    hs = _grid((lo, hi), step)
    attack, uncertain = action_probability_grid(hs, t)
    for a in (hs, attack, uncertain):
        a.setflags(write=False)
    return hs, attack, uncertain


def golden_section_minimize(f, a: float, b: float, tol: float = GOLDEN_TOL) -> float:
    """Minimise a unimodal ``f`` on ``[a, b]``; returns the midpoint of the final bracket."""
    invphi = (math.sqrt(5) - 1) / 2
    a, b = min(a, b), max(a, b)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2


def fit_block_param(
    target_conditional: float,
    w: float = CD_UNCERTAIN_WEIGHT,
    t: float = DEFAULT_TIME,
    h_range: tuple[float, float] = H_RANGE,
    grid_step: float = GRID_STEP,
) -> tuple[float, float]:
    """Find ``h`` whose reported conditional best matches ``target_conditional``.

    Least squares over a uniform grid, then golden-section refinement inside the
    cells adjacent to the best grid point. Ties on the grid go to the smallest
    ``|h|``, then the smaller ``h``. Returns ``(h, |fitted - target|)``; emits
    :class:`FitWarning` when that residual exceeds ``CLAMP_RESIDUAL``.
    """
    if not 0.0 <= target_conditional <= 1.0:
        raise ValueError(f"target {target_conditional} is not a probability")
    lo, hi = float(h_range[0]), float(h_range[1])
    hs, attack, uncertain = _cached_grid(float(t), lo, hi, float(grid_step))

    obj = (attack + w * uncertain - target_conditional) ** 2
    tied = np.flatnonzero(obj <= obj.min() + TIE_TOL)
    best = min(tied, key=lambda i: (abs(hs[i]), hs[i]))
    h0 = float(hs[best])

    def sq_err(h):
        return (qdb_conditional(h, t, w) - target_conditional) ** 2

    h1 = golden_section_minimize(sq_err, max(lo, h0 - grid_step), min(hi, h0 + grid_step))
    h = h1 if sq_err(h1) < sq_err(h0) else h0
    residual = abs(qdb_conditional(h, t, w) - target_conditional)
    if residual > CLAMP_RESIDUAL:
        warnings.warn(
            f"target {target_conditional:.6f} unreachable for h in [{lo}, {hi}]; residual {residual:.3e}",
            FitWarning,
            stacklevel=2,
        )
    return h, residual


def predict(
    p_g: float,
    p_b: float,
    params: HamiltonianParams,
    w_cd: float = CD_UNCERTAIN_WEIGHT,
    w_d: float = D_ALONE_UNCERTAIN_WEIGHT,
) -> Prediction:
    """Model response in the categorize-then-decide and decide-alone conditions.

    C-D: condition the prior state on each category, evolve the block, and
    report attack plus ``w_cd`` of the uncertain mass. D-alone: evolve the whole
    superposed state and measure with uncertain coefficient ``sqrt(w_d)``.
    """
    check_priors(p_g, p_b)
    psi0 = initial_state_from_priors(p_g, p_b)
    t = params.t

    blocks = {}
    for cat, h in ((Category.GOOD, params.h_g), (Category.BAD, params.h_b)):
        try:
            block = condition_on_category(psi0, cat)
        except ZeroDivisionError:
            # weightless category: its conditional is still defined by the uniform block
            block = _uniform_block()
        blocks[cat] = action_probabilities(evolve(block, build_block_hamiltonian(h), t))

    good, bad = blocks[Category.GOOD], blocks[Category.BAD]
    cond_g = reported_conditional_attack(good, w_cd)
    cond_b = reported_conditional_attack(bad, w_cd)

    psi_t = evolve(psi0, build_full_hamiltonian(params), t)
    d_alone = measure_probability(psi_t, uncertain_weight_operator(w_d).tiled())

    return Prediction(
        p_attack_given_good=cond_g,
        p_attack_given_bad=cond_b,
        p_uncertain_given_good=good.uncertain,
        p_uncertain_given_bad=bad.uncertain,
        p_total_cd=p_g * cond_g + p_b * cond_b,
        p_attack_d_alone=d_alone,
    )


def markov_total_probability(p_g: float, p_attack_given_good: float, p_b: float, p_attack_given_bad: float) -> float:
    """Total-probability response of the Markov chain model; also its D-alone prediction."""
    check_priors(p_g, p_b)
    for name, p in (("p_attack_given_good", p_attack_given_good), ("p_attack_given_bad", p_attack_given_bad)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} = {p} is not a probability")
    return p_g * p_attack_given_good + p_b * p_attack_given_bad


def markov_prediction(p_g, p_attack_given_good, p_b, p_attack_given_bad) -> tuple[float, float]:
    """``(P_T, P(A))`` of the Markov baseline; equal by construction."""
    p = markov_total_probability(p_g, p_attack_given_good, p_b, p_attack_given_bad)
    return p, p


def fit_experiment(
    p_g: float,
    p_b: float,
    obs_attack_given_good: float,
    obs_attack_given_bad: float,
    *,
    w_cd: float = CD_UNCERTAIN_WEIGHT,
    w_d: float = D_ALONE_UNCERTAIN_WEIGHT,
    t: float = DEFAULT_TIME,
    h_range: tuple[float, float] = H_RANGE,
    grid_step: float = GRID_STEP,
) -> FittedModel:
    # the blocks never mix, so the two parameters are fitted separately
    kw = dict(w=w_cd, t=t, h_range=h_range, grid_step=grid_step)
    h_g, r_g = fit_block_param(obs_attack_given_good, **kw)
    h_b, r_b = fit_block_param(obs_attack_given_bad, **kw)
    params = HamiltonianParams(h_g, h_b, t)
    return FittedModel(params, r_g, r_b, predict(p_g, p_b, params, w_cd, w_d))


def mean_relative_error(pairs: Iterable[tuple[float, float]]) -> float:
    """Mean of ``|predicted - observed| / observed`` over ``(observed, predicted)`` pairs."""
    errs = [abs(pred - obs) / obs for obs, pred in pairs]
    if not errs:
        raise ValueError("no pairs given")
    return math.fsum(errs) / len(errs)
