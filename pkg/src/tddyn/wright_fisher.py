"""Wright-Fisher process for a finite population of Traveler's Dilemma players.

Each generation every individual plays all others (no self-play), fitness is
``exp(rho * accumulated payoff)``, the next generation is drawn with
replacement in proportion to fitness and each offspring mutates with
probability ``mu`` by a nonzero step of at most ``delta`` claims, clamped to
the action space.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence, Union

import numpy as np

from .game import GameParams, build_payoff_matrix
from .sweep import RNG_ALGORITHM, SweepResult, derive_seed, make_rng, run_parallel

InitRule = Union[str, int, Sequence[int], np.ndarray]


@dataclass
class WFConfig:
    """Wright-Fisher run settings.

    ``init`` is ``"uniform"`` (independent uniform claims), a single claim
    (monomorphic start) or an explicit length-``N`` sequence of claims.
    """

    game: GameParams = field(default_factory=GameParams)
    N: int = 100
    mu: float = 0.1
    delta: int = 1
    rho: float = 1.0
    generations: int = 1000
    seed: int = 0
    init: InitRule = "uniform"

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if self.delta < 1 or int(self.delta) != self.delta:
            raise ValueError(f"delta must be an integer >= 1, got {self.delta}")
        if not self.rho >= 0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")
        if self.generations < 0:
            raise ValueError(f"generations must be >= 0, got {self.generations}")


@dataclass
class WFResult:
    mean_claims: np.ndarray  # one entry per generation, including generation 0
    histogram: np.ndarray  # terminal counts, index = claim - lower
    population: np.ndarray

    @property
    def terminal_mean(self) -> float:
        return float(self.mean_claims[-1])


def initial_population(cfg: WFConfig, rng: np.random.Generator) -> np.ndarray:
    L, U = cfg.game.lower, cfg.game.upper
    init = cfg.init
    if isinstance(init, str):
        if init != "uniform":
            raise ValueError(f"unknown init rule {init!r}")
        return rng.integers(L, U + 1, size=cfg.N)
    if np.isscalar(init):
        pop = np.full(cfg.N, int(init))
    else:
        pop = np.asarray(init, dtype=np.int64).copy()
        if pop.shape != (cfg.N,):
            raise ValueError(f"initial population must have length N={cfg.N}")
    if pop.min() < L or pop.max() > U:
        raise ValueError(f"initial claims must lie in [{L}, {U}]")
    return pop.astype(np.int64)


def accumulated_payoffs(
    pop: np.ndarray, params: GameParams, payoff_matrix: np.ndarray | None = None
) -> np.ndarray:
    """Total payoff of each individual against every other member.

    Uses the claim histogram, so the cost is ``O(m^2 + N)``.  A prebuilt
    payoff matrix may be passed to skip rebuilding it.
    """
    idx = np.asarray(pop, dtype=np.int64) - params.lower
    A = build_payoff_matrix(params) if payoff_matrix is None else payoff_matrix
    counts = np.bincount(idx, minlength=params.n_claims)
    against_all = A @ counts
    # remove the self-encounter, which pays the own claim
    return against_all[idx] - A[idx, idx]


def fitness_weights(payoffs: np.ndarray, rho: float) -> np.ndarray:
    """Sampling probabilities proportional to ``exp(rho * payoffs)``."""
    z = rho * np.asarray(payoffs, dtype=float)
    if not np.isfinite(z).all():
        raise ValueError("payoffs must be finite")
    w = np.exp(z - z.max())
    return w / w.sum()


def mutation_steps(rng: np.random.Generator, delta: int, size: int) -> np.ndarray:
    """Uniform draws from ``{-delta, ..., -1, +1, ..., +delta}``."""
    k = rng.integers(0, 2 * delta, size=size)
    return np.where(k < delta, k - delta, k - delta + 1)


def next_generation(
    pop: np.ndarray, w: np.ndarray, cfg: WFConfig, rng: np.random.Generator
) -> np.ndarray:
    """Resample ``N`` offspring by weight, then mutate and clamp."""
    pop = np.asarray(pop)
    n = pop.size
    offspring = pop[rng.choice(n, size=n, p=w)]
    mutate = rng.random(n) < cfg.mu
    n_mut = int(mutate.sum())
    if n_mut:
        steps = mutation_steps(rng, int(cfg.delta), n_mut)
        offspring[mutate] = np.clip(
            offspring[mutate] + steps, cfg.game.lower, cfg.game.upper
        )
    return offspring


def run_wf(cfg: WFConfig) -> WFResult:
    """Iterate payoff -> fitness -> resampling for ``cfg.generations`` steps."""
    rng = make_rng(cfg.seed)
    A = build_payoff_matrix(cfg.game)
    pop = initial_population(cfg, rng)
    means = np.empty(cfg.generations + 1)
    means[0] = pop.mean()
    for g in range(1, cfg.generations + 1):
        w = fitness_weights(accumulated_payoffs(pop, cfg.game, A), cfg.rho)
        pop = next_generation(pop, w, cfg, rng)
        means[g] = pop.mean()
    hist = np.bincount(pop - cfg.game.lower, minlength=cfg.game.n_claims)
    return WFResult(mean_claims=means, histogram=hist, population=pop)


def run_until_fixation(cfg: WFConfig, max_generations: int = 1_000_000) -> tuple[int, int]:
    """Run until the population is monomorphic.

    Returns the fixed claim and the number of generations taken.  Only
    meaningful without mutation; raises if ``max_generations`` is exceeded.
    """
    rng = make_rng(cfg.seed)
    A = build_payoff_matrix(cfg.game)
    pop = initial_population(cfg, rng)
    for g in range(max_generations + 1):
        if (pop == pop[0]).all():
            return int(pop[0]), g
        w = fitness_weights(accumulated_payoffs(pop, cfg.game, A), cfg.rho)
        pop = next_generation(pop, w, cfg, rng)
    raise RuntimeError(f"no fixation within {max_generations} generations")


def _sweep_worker(base: WFConfig, point: dict) -> dict:
    cfg = dataclasses.replace(
        base,
        rho=point["rho"],
        mu=point["mu"],
        delta=point["delta"],
        seed=point["seed"],
    )
    return {"mean_claim": run_wf(cfg).terminal_mean}


def sweep_wf(
    mu_values: Sequence[float],
    delta_values: Sequence[int],
    rho_values: Sequence[float],
    replicates: int,
    cfg: WFConfig,
    threads: int = 1,
) -> SweepResult:
    """Terminal mean claim over a (rho, mu, delta) grid with replicates.

    Row order is rho, then mu, then delta, then replicate.  The seed of
    replicate ``r`` at grid index ``g`` is ``derive_seed(cfg.seed, g, r)``.
    """
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    points = []
    g = 0
    for rho in rho_values:
        for mu in mu_values:
            for delta in delta_values:
                # validate eagerly so a bad grid fails before any run
                WFConfig(game=cfg.game, N=cfg.N, mu=mu, delta=delta, rho=rho)
                for r in range(replicates):
                    points.append(
                        {
                            "rho": float(rho),
                            "mu": float(mu),
                            "delta": int(delta),
                            "replicate": r,
                            "seed": derive_seed(cfg.seed, g, r),
                        }
                    )
                g += 1
    result = run_parallel(points, partial(_sweep_worker, cfg), ["mean_claim"], threads=threads)
    result.metadata.update(
        {
            "L": cfg.game.lower,
            "U": cfg.game.upper,
            "R": cfg.game.reward,
            "N": cfg.N,
            "generations": cfg.generations,
            "init": cfg.init if isinstance(cfg.init, (str, int)) else list(map(int, cfg.init)),
            "replicates": replicates,
            "base_seed": cfg.seed,
            "rng": RNG_ALGORITHM,
        }
    )
    return result


def replicate_means(result: SweepResult) -> dict[tuple[float, float, int], float]:
    """Replicate-averaged terminal mean claim keyed by ``(rho, mu, delta)``."""
    acc: dict[tuple[float, float, int], list[float]] = {}
    for row in result.rows:
        if row.get("error"):
            continue
        acc.setdefault((row["rho"], row["mu"], row["delta"]), []).append(row["mean_claim"])
    return {k: float(np.mean(v)) for k, v in acc.items()}
