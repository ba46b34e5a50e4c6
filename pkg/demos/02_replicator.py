# # Replicator-mutator dynamics
#
# A continuous population of claim types evolves by payoff-proportional
# growth plus uniform mutation of strength q.

import numpy as np

from tddyn import GameParams
from tddyn.replicator import RMConfig, highest_frequency_claim, integrate

# Without mutation on a small action space the population slides down claim
# by claim until only the lowest one is left.

small = GameParams(2, 10, 2)
traj = integrate(RMConfig(game=small, q=0.0, sample_every=1))
print(traj.converged, traj.t_final)
print(np.round(traj.terminal, 6))

# The slide is a stairway: each claim takes over briefly before its
# undercutter does.

previous = None
for t, x in zip(traj.times, traj.states):
    claim = highest_frequency_claim(x, small)
    if claim != previous:
        print(f"t={t:6.2f}  dominant claim {claim}")
        previous = claim

# Strong mutation on the full game keeps every claim present and the peak
# settles high.

full = GameParams(2, 100, 2)
traj = integrate(RMConfig(game=full, q=0.7))
print(highest_frequency_claim(traj.terminal, full))

# A large reward drags the peak back down.

big = GameParams(2, 100, 40)
print(highest_frequency_claim(integrate(RMConfig(game=big, q=0.7)).terminal, big))
