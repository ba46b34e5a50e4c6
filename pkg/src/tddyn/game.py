"""Traveler's Dilemma payoffs, embedded 2x2 sub-games and iterated dominance.

Claims are integers in ``[lower, upper]``.  Throughout the package the claim
``c`` lives at index ``c - lower`` of every vector and matrix.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """A claim or claim gap falls outside the action space."""


@dataclass(frozen=True)
class GameParams:
    """Action-space bounds and reward of a Traveler's Dilemma.

    Parameters
    ----------
    lower, upper : int
        Smallest and largest admissible claim, ``0 <= lower < upper``.
    reward : int
        Bonus paid to the lower claimant and taken from the higher one
        (``reward > 1``).
    """

    lower: int = 2
    upper: int = 100
    reward: int = 2

    def __post_init__(self):
        for name in ("lower", "upper", "reward"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ValueError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not 0 <= self.lower < self.upper:
            raise ValueError(
                f"need 0 <= lower < upper, got lower={self.lower}, upper={self.upper}"
            )
        if self.reward <= 1:
            raise ValueError(f"reward must be > 1, got {self.reward}")

    @property
    def n_claims(self) -> int:
        return self.upper - self.lower + 1

    @property
    def claims(self) -> np.ndarray:
        return np.arange(self.lower, self.upper + 1)

    def check_claim(self, claim: int) -> int:
        if not self.lower <= claim <= self.upper:
            raise DomainError(
                f"claim {claim} outside action space [{self.lower}, {self.upper}]"
            )
        return int(claim)


def payoff(own: int, other: int, params: GameParams) -> int:
    """Payoff to a player claiming ``own`` against an opponent claiming ``other``."""
    own = params.check_claim(own)
    other = params.check_claim(other)
    if own == other:
        return own
    if own < other:
        return own + params.reward
    return other - params.reward


def build_payoff_matrix(params: GameParams) -> np.ndarray:
    """Full ``m x m`` integer payoff matrix, row = own claim, column = opponent."""
    own = params.claims[:, None]
    other = params.claims[None, :]
    return np.where(
        own == other,
        own,
        np.where(own < other, own + params.reward, other - params.reward),
    ).astype(np.int64)


class SubgameKind(enum.Enum):
    PRISONERS_DILEMMA = "PrisonersDilemma"
    COORDINATION = "Coordination"
    OTHER = "Other"


@dataclass(frozen=True)
class SubgameClass:
    kind: SubgameKind
    high_equilibrium_payoff_dominant: bool = False
    high_equilibrium_risk_dominant: bool = False


def classify_subgame(base: int, gap: int, params: GameParams) -> SubgameClass:
    """Classify the 2x2 game obtained by restricting claims to ``{base, base+gap}``.

    With ``A = payoff(n, n)``, ``B = payoff(n, n+s)``, ``C = payoff(n+s, n)`` and
    ``D = payoff(n+s, n+s)``:

    * Prisoner's Dilemma when the low claim strictly dominates (``A > C`` and
      ``B > D``) while mutual high claims pay more than mutual low ones (``D > A``).
    * Coordination when both diagonal profiles are Nash equilibria
      (``A >= C`` and ``D >= B``).  At ``gap == reward`` the high equilibrium
      is only weak; it is still classified as coordination.

    For coordination games the dominance flags describe ``(n+s, n+s)``; risk
    dominance compares the deviation losses ``D - B`` and ``A - C``.
    """
    if isinstance(gap, bool) or int(gap) != gap or gap < 1:
        raise DomainError(f"gap must be a positive integer, got {gap!r}")
    low = params.check_claim(base)
    high = low + int(gap)
    if high > params.upper:
        raise DomainError(
            f"base + gap = {high} exceeds upper claim {params.upper}"
        )
    a = payoff(low, low, params)
    b = payoff(low, high, params)
    c = payoff(high, low, params)
    d = payoff(high, high, params)

    if a > c and b > d and d > a:
        return SubgameClass(SubgameKind.PRISONERS_DILEMMA)
    if a >= c and d >= b:
        return SubgameClass(
            SubgameKind.COORDINATION,
            high_equilibrium_payoff_dominant=d > a,
            high_equilibrium_risk_dominant=(d - b) > (a - c),
        )
    return SubgameClass(SubgameKind.OTHER)


def _dominated(matrix: np.ndarray, alive: np.ndarray, strict: bool) -> np.ndarray:
    sub = matrix[np.ix_(alive, alive)]
    # diff[j, i, k] = payoff(j, k) - payoff(i, k) over surviving k
    diff = sub[:, None, :] - sub[None, :, :]
    if strict:
        dominates = (diff > 0).all(axis=2)
    else:
        dominates = (diff >= 0).all(axis=2) & (diff > 0).any(axis=2)
    np.fill_diagonal(dominates, False)
    return alive[dominates.any(axis=0)]


def iterated_elimination(params: GameParams, criterion: str = "weak") -> set[int]:
    """Claims surviving iterated elimination of dominated pure strategies.

    Every round removes, simultaneously, all claims dominated by another
    surviving claim when the opponent is restricted to the surviving set.

    Parameters
    ----------
    params : GameParams
    criterion : {"weak", "strict"}
        ``"weak"`` removes claims that do no better against every surviving
        claim and strictly worse against at least one.  ``"strict"`` requires
        a strict improvement everywhere; because a claim and the one just
        below it tie against every much lower claim, strict pure dominance
        only bites on very small action spaces.

    Returns
    -------
    set of int
        Surviving claims.
    """
    if criterion not in ("weak", "strict"):
        raise ValueError(f"criterion must be 'weak' or 'strict', got {criterion!r}")
    matrix = build_payoff_matrix(params)
    alive = np.arange(params.n_claims)
    while True:
        removed = _dominated(matrix, alive, strict=criterion == "strict")
        if removed.size == 0:
            break
        alive = np.setdiff1d(alive, removed)
    return {int(i) + params.lower for i in alive}
