# # Two players learning by introspection
#
# At each step one player considers a random alternative claim and switches
# with a logistic probability in the payoff gain.  The joint claim is a
# Markov chain, so its long-run behaviour can be computed exactly.

import numpy as np

from tddyn import GameParams
from tddyn.introspection import (
    IntroConfig,
    average_claim,
    build_transition,
    run_intro,
    stationary_distribution,
)

game = GameParams(2, 20, 2)

# Simulate, then solve for the stationary distribution of the same chain.

run = run_intro(IntroConfig(game=game, beta=1.0, steps=1_000_000, burn_in=10_000, seed=3))
dist = stationary_distribution(build_transition(game, 1.0))
print(round(run.average_claim, 3), round(average_claim(dist), 3))
print("total variation:", 0.5 * np.abs(run.empirical - dist.matrix).sum())

# On the full game the exact average claim responds to both selection
# strength and reward.

full = GameParams(2, 100, 2)
for beta in (0.0, 0.01, 0.1, 1.0):
    print(beta, round(average_claim(stationary_distribution(build_transition(full, beta))), 3))

big = GameParams(2, 100, 40)
print("R=40:", round(average_claim(stationary_distribution(build_transition(big, 1.0))), 3))
