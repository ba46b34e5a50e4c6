"""Evolutionary and learning dynamics of the Traveler's Dilemma."""

__version__ = "0.1.0"

from .game import (  # noqa: E402
    DomainError,
    GameParams,
    SubgameClass,
    SubgameKind,
    build_payoff_matrix,
    classify_subgame,
    iterated_elimination,
    payoff,
)
