# # A finite population: Wright-Fisher
#
# N individuals play everyone else, reproduce in proportion to
# exp(rho * total payoff), and offspring mutate with probability mu by a
# random step of at most delta claims.

import numpy as np

from tddyn import GameParams
from tddyn.wright_fisher import WFConfig, run_until_fixation, run_wf

game = GameParams(2, 100, 2)

# Frequent, large mutations keep the population diverse and high.

high = run_wf(WFConfig(game=game, mu=0.9, delta=30, rho=1.0, seed=1))
print(round(high.terminal_mean, 2))

# Rare single-step mutations let selection drive claims to the bottom.

low = run_wf(WFConfig(game=game, mu=0.01, delta=1, rho=1.0, seed=1))
print(round(low.terminal_mean, 2))
print(low.mean_claims[::100].round(1))

# With no selection and no mutation a claim held by k of N individuals fixes
# with probability k/N.

runs = 2000
fixed = sum(
    run_until_fixation(WFConfig(game=game, N=10, mu=0.0, rho=0.0, init=[60] * 3 + [50] * 7, seed=s))[0] == 60
    for s in range(runs)
)
print(fixed / runs)
