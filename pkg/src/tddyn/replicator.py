"""Replicator-mutator dynamics on the claim simplex.

The state is a frequency vector ``x`` over the ``m`` claims.  Each type grows
with its expected payoff against the population mixture and spreads a
fraction ``q`` of its offspring uniformly over the other ``m - 1`` types.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from .game import GameParams, build_payoff_matrix
from .sweep import SweepResult, run_parallel


class IntegrationError(RuntimeError):
    """The state left the finite reals during integration."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t = {t:g})")
        self.t = t


def uniform_state(m: int) -> np.ndarray:
    return np.full(m, 1.0 / m)


def check_simplex(x: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("frequency vector must be one-dimensional")
    if (x < 0).any() or abs(x.sum() - 1.0) > atol:
        raise ValueError("frequency vector must be nonnegative and sum to 1")
    return x


def fitness_vector(x: np.ndarray, payoffs: np.ndarray) -> np.ndarray:
    """Expected payoff of every claim against the mixture ``x``."""
    x = np.asarray(x, dtype=float)
    payoffs = np.asarray(payoffs)
    if payoffs.ndim != 2 or payoffs.shape != (x.size, x.size):
        raise ValueError(
            f"payoff matrix shape {payoffs.shape} does not match state length {x.size}"
        )
    return payoffs @ x


def max_mutation(m: int) -> float:
    return (m - 1) / m


def build_mutation_matrix(m: int, q: float) -> np.ndarray:
    """Row-stochastic uniform mutation kernel.

    Entry ``[j, i]`` is the probability that type ``j`` mutates to type ``i``:
    ``1 - q`` on the diagonal and ``q / (m - 1)`` elsewhere.
    """
    if m < 2:
        raise ValueError(f"need at least two types, got m={m}")
    if not 0.0 <= q <= max_mutation(m) + 1e-15:
        raise ValueError(f"q={q} outside admissible range [0, {m - 1}/{m}]")
    Q = np.full((m, m), q / (m - 1))
    np.fill_diagonal(Q, 1.0 - q)
    return Q


def rm_rhs(x: np.ndarray, payoffs: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Time derivative of the frequencies.

    ``dx_i = sum_j x_j f_j Q[j, i] - x_i * phi`` with ``f = payoffs @ x`` and
    ``phi = x . f`` the mean fitness.
    """
    f = fitness_vector(x, payoffs)
    if Q.shape != payoffs.shape:
        raise ValueError(f"mutation matrix shape {Q.shape} != payoff shape {payoffs.shape}")
    phi = x @ f
    return (x * f) @ Q - x * phi


def payoff_shift(params: GameParams) -> int:
    """Constant added to every payoff so that fitness stays nonnegative.

    The smallest payoff is ``lower - reward``; it is lifted to zero when
    negative and left alone otherwise.
    """
    return max(0, params.reward - params.lower)


@dataclass
class RMConfig:
    game: GameParams = field(default_factory=GameParams)
    q: float = 0.0
    dt: float = 0.01
    t_max: float = 10_000.0
    conv_tol: float = 1e-10
    sample_every: int = 100  # steps between stored snapshots

    def __post_init__(self):
        m = self.game.n_claims
        if not 0.0 <= self.q <= max_mutation(m) + 1e-15:
            raise ValueError(f"q={self.q} outside admissible range [0, {m - 1}/{m}]")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if not self.conv_tol > 0:
            raise ValueError(f"conv_tol must be positive, got {self.conv_tol}")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")


@dataclass
class RMTrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_samples, m)
    converged: bool
    shift: int
    # largest |sum(x) - 1| and most negative entry seen before each renormalisation
    max_sum_error: float = 0.0
    min_entry: float = 0.0

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]

    @property
    def t_final(self) -> float:
        return float(self.times[-1])


def integrate(cfg: RMConfig, x0: np.ndarray | None = None) -> RMTrajectory:
    """Fixed-step RK4 integration of the replicator-mutator flow.

    After every step negative entries are clipped to zero and the state is
    renormalised.  Integration stops as soon as the max-norm of the right-hand
    side drops below ``cfg.conv_tol`` or when ``cfg.t_max`` is reached.

    Raises
    ------
    IntegrationError
        If the state becomes non-finite.
    """
    params = cfg.game
    m = params.n_claims
    shift = payoff_shift(params)
    A = build_payoff_matrix(params).astype(float) + shift
    Q = build_mutation_matrix(m, cfg.q)
    x = uniform_state(m) if x0 is None else check_simplex(x0).copy()

    def rhs(y):
        f = A @ y
        return (y * f) @ Q - y * (y @ f)

    dt = cfg.dt
    n_steps = int(np.ceil(cfg.t_max / dt - 1e-9))
    times = [0.0]
    states = [x.copy()]
    max_sum_error = 0.0
    min_entry = float(x.min())
    converged = False
    k1 = rhs(x)
    step = 0
    if np.abs(k1).max() < cfg.conv_tol:
        converged = True
    while not converged and step < n_steps:
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        step += 1
        t = step * dt
        if not np.isfinite(x).all():
            raise IntegrationError("non-finite state", t)
        max_sum_error = max(max_sum_error, abs(x.sum() - 1.0))
        min_entry = min(min_entry, float(x.min()))
        np.clip(x, 0.0, None, out=x)
        x /= x.sum()
        k1 = rhs(x)
        converged = np.abs(k1).max() < cfg.conv_tol
        if converged or step % cfg.sample_every == 0 or step == n_steps:
            times.append(t)
            states.append(x.copy())

    return RMTrajectory(
        times=np.array(times),
        states=np.array(states),
        converged=bool(converged),
        shift=shift,
        max_sum_error=max_sum_error,
        min_entry=min_entry,
    )


def highest_frequency_claim(x: np.ndarray, params: GameParams) -> int:
    """Claim carrying the largest frequency; ties go to the lowest claim."""
    return int(np.argmax(np.asarray(x))) + params.lower


def _sweep_worker(base: RMConfig, point: dict) -> dict:
    game = dataclasses.replace(base.game, reward=point["R"])
    cfg = dataclasses.replace(base, game=game, q=point["q"])
    traj = integrate(cfg)
    return {
        "highest_claim": highest_frequency_claim(traj.terminal, game),
        "converged": traj.converged,
    }


def sweep_rm(
    R_values: Sequence[int],
    q_values: Sequence[float],
    cfg: RMConfig,
    threads: int = 1,
) -> SweepResult:
    """Highest-frequency claim over a (reward, mutation strength) grid.

    Every grid point starts from the uniform state; rows come out with R as
    the outer loop.  ``cfg`` supplies the action space and integrator
    settings, its own reward and q are ignored.
    """
    m = cfg.game.n_claims
    for q in q_values:
        if not 0.0 <= q <= max_mutation(m) + 1e-15:
            raise ValueError(f"q={q} outside admissible range [0, {m - 1}/{m}]")
    points = [{"R": int(R), "q": float(q)} for R in R_values for q in q_values]
    result = run_parallel(
        points,
        partial(_sweep_worker, cfg),
        ["highest_claim", "converged"],
        threads=threads,
    )
    shifts = {
        str(int(R)): payoff_shift(dataclasses.replace(cfg.game, reward=int(R)))
        for R in R_values
    }
    result.metadata.update(
        {
            "L": cfg.game.lower,
            "U": cfg.game.upper,
            "dt": cfg.dt,
            "t_max": cfg.t_max,
            "conv_tol": cfg.conv_tol,
            "initial_state": "uniform",
            "payoff_shift": shifts,
        }
    )
    return result
