# # The claim game
#
# Two players each name an integer claim in [L, U].  Matching claims are paid
# as named; otherwise the lower claimant gets its claim plus a reward R and
# the higher claimant gets the lower claim minus R.

import numpy as np

from tddyn import GameParams, build_payoff_matrix, classify_subgame, iterated_elimination, payoff

params = GameParams(lower=2, upper=100, reward=2)
print(payoff(99, 100, params), payoff(100, 99, params))

# The full payoff matrix is small enough to build in one shot.  Row = own
# claim, column = opponent claim.

A = build_payoff_matrix(params)
print(A.shape)
print(A[:4, :4])

# Undercutting by one always pays against a matching opponent, which is why
# iterated elimination of weakly dominated claims unravels all the way down.

print(iterated_elimination(params))

# Restricting both players to two claims {n, n+s} gives a 2x2 game.  Small gaps
# are a Prisoner's Dilemma, large gaps a coordination game.

for gap in (1, 2, 3, 10, 98):
    c = classify_subgame(2, gap, params)
    print(gap, c.kind.value, c.high_equilibrium_payoff_dominant, c.high_equilibrium_risk_dominant)

# Counting over every (n, s) for a larger reward:

params4 = GameParams(2, 100, 4)
kinds = [classify_subgame(n, s, params4).kind.value for n in range(2, 100) for s in range(1, 101 - n)]
print({k: kinds.count(k) for k in set(kinds)})
