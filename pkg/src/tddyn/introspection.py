"""Two-player introspection dynamics with Fermi acceptance.

At every step one of the two players (chosen with probability 1/2) draws an
alternative claim uniformly from the whole action space and switches to it
with probability ``fermi(payoff(alt, opp) - payoff(cur, opp), beta)``; the
opponent's claim is held fixed.  The joint claim pair is a Markov chain on
``m**2`` states, indexed ``(a - L) * m + (b - L)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import expit

from .game import GameParams, build_payoff_matrix
from .sweep import SweepResult, make_rng, run_parallel


class ConvergenceError(RuntimeError):
    """Power iteration hit its cap; carries the best iterate."""

    def __init__(self, message: str, best: np.ndarray, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.best = best
        self.residual = residual


def fermi(delta_payoff, beta: float):
    """Probability of adopting an alternative that changes the payoff by ``delta_payoff``.

    ``beta = inf`` gives the step function (ties stay at 1/2).
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    d = np.asarray(delta_payoff, dtype=float)
    if math.isinf(beta):
        p = np.where(d > 0, 1.0, np.where(d < 0, 0.0, 0.5))
    else:
        p = expit(beta * d)
    return p if p.ndim else float(p)


def acceptance_table(params: GameParams, beta: float) -> np.ndarray:
    """``table[cur, alt, opp]``: probability of switching from ``cur`` to ``alt``
    while the opponent plays ``opp`` (all as claim indices)."""
    A = build_payoff_matrix(params).astype(float)
    gain = A[None, :, :] - A[:, None, :]
    return fermi(gain, beta)


@dataclass
class IntroConfig:
    """Introspection run settings.

    ``init`` is ``"uniform"`` (a uniformly random joint state) or an explicit
    ``(claim_a, claim_b)`` pair.
    """

    game: GameParams = field(default_factory=GameParams)
    beta: float = 1.0
    steps: int = 100_000
    burn_in: int = 0
    seed: int = 0
    init: Union[str, tuple[int, int]] = "uniform"

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if not 0 <= self.burn_in < self.steps:
            raise ValueError(f"need 0 <= burn_in < steps, got burn_in={self.burn_in}")


def initial_state(cfg: IntroConfig, rng: np.random.Generator) -> tuple[int, int]:
    L, U = cfg.game.lower, cfg.game.upper
    if isinstance(cfg.init, str):
        if cfg.init != "uniform":
            raise ValueError(f"unknown init rule {cfg.init!r}")
        a, b = rng.integers(L, U + 1, size=2)
        return int(a), int(b)
    a, b = (cfg.game.check_claim(c) for c in cfg.init)
    return a, b


def step(
    state: tuple[int, int],
    cfg: IntroConfig,
    rng: np.random.Generator,
    table: np.ndarray | None = None,
) -> tuple[int, int]:
    """One introspection update of the joint state ``(claim_a, claim_b)``."""
    params = cfg.game
    L, m = params.lower, params.n_claims
    a, b = (params.check_claim(c) - L for c in state)
    if table is None:
        table = acceptance_table(params, cfg.beta)
    player = rng.integers(2)
    alt = int(rng.integers(m))
    u = rng.random()
    if player == 0:
        if u < table[a, alt, b]:
            a = alt
    else:
        if u < table[b, alt, a]:
            b = alt
    return a + L, b + L


@dataclass
class IntroRun:
    average_claim: float  # post-burn-in mean of (a + b) / 2
    occupancy: np.ndarray  # (m, m) post-burn-in visit counts
    trace: np.ndarray | None  # (steps + 1, 2) claims, row 0 = initial state

    @property
    def empirical(self) -> np.ndarray:
        return self.occupancy / self.occupancy.sum()

    def claim_std(self, lower: int) -> float:
        """Standard deviation of an individual player's claim after burn-in."""
        m = self.occupancy.shape[0]
        claims = np.arange(lower, lower + m)
        marginal = 0.5 * (self.empirical.sum(axis=1) + self.empirical.sum(axis=0))
        mean = marginal @ claims
        return float(np.sqrt(marginal @ (claims - mean) ** 2))


_CHUNK = 1 << 20


def run_intro(cfg: IntroConfig, record_trace: bool = True) -> IntroRun:
    """Simulate ``cfg.steps`` introspection updates.

    States after steps ``burn_in + 1 .. steps`` enter the occupancy counts and
    the time-averaged claim.  Random numbers are drawn in blocks: player
    choices, then proposals, then uniforms for each block.
    """
    params = cfg.game
    L, m = params.lower, params.n_claims
    rng = make_rng(cfg.seed)
    a, b = initial_state(cfg, rng)
    a -= L
    b -= L
    acc = acceptance_table(params, cfg.beta).ravel().tolist()
    counts = np.zeros(m * m, dtype=np.int64)
    trace = np.empty((cfg.steps + 1, 2), dtype=np.int32) if record_trace else None
    if trace is not None:
        trace[0] = a, b

    done = 0
    while done < cfg.steps:
        k = min(_CHUNK, cfg.steps - done)
        players = rng.integers(0, 2, size=k).tolist()
        alts = rng.integers(0, m, size=k).tolist()
        us = rng.random(k).tolist()
        visited = [0] * k
        for i in range(k):
            alt = alts[i]
            if players[i]:
                if us[i] < acc[(b * m + alt) * m + a]:
                    b = alt
            elif us[i] < acc[(a * m + alt) * m + b]:
                a = alt
            visited[i] = a * m + b
        visited = np.array(visited, dtype=np.int64)
        keep_from = max(0, cfg.burn_in - done)
        if keep_from < k:
            counts += np.bincount(visited[keep_from:], minlength=m * m)
        if trace is not None:
            trace[done + 1 : done + k + 1, 0] = visited // m
            trace[done + 1 : done + k + 1, 1] = visited % m
        done += k

    if trace is not None:
        trace += L
    occupancy = counts.reshape(m, m)
    claims = np.arange(L, L + m)
    n = occupancy.sum()
    avg = 0.5 * (occupancy.sum(axis=1) @ claims + occupancy.sum(axis=0) @ claims) / n
    return IntroRun(average_claim=float(avg), occupancy=occupancy, trace=trace)


@dataclass
class TransitionKernel:
    matrix: sp.csr_matrix  # row-stochastic, (m*m, m*m)
    game: GameParams
    beta: float

    @property
    def n_claims(self) -> int:
        return self.game.n_claims


def build_transition(params: GameParams, beta: float) -> TransitionKernel:
    """Exact one-step kernel of :func:`step` as a sparse matrix.

    Each row has the ``2 (m - 1)`` switching edges (probability
    ``accept / (2 m)`` each) and a self-loop holding the remaining mass,
    which includes proposals equal to the current claim.
    """
    if not (beta >= 0 and math.isfinite(beta)):
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    m = params.n_claims
    table = acceptance_table(params, beta) / (2 * m)
    cur, alt, opp = np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij")
    moving = cur != alt
    cur, alt, opp = cur[moving], alt[moving], opp[moving]
    prob = table[cur, alt, opp]
    # player a switches: (cur, opp) -> (alt, opp); player b: (opp, cur) -> (opp, alt)
    rows = np.concatenate([cur * m + opp, opp * m + cur])
    cols = np.concatenate([alt * m + opp, opp * m + alt])
    vals = np.concatenate([prob, prob])
    off = sp.csr_matrix((vals, (rows, cols)), shape=(m * m, m * m))
    stay = 1.0 - np.asarray(off.sum(axis=1)).ravel()
    matrix = (off + sp.diags(stay)).tocsr()
    matrix.sort_indices()
    return TransitionKernel(matrix=matrix, game=params, beta=float(beta))


@dataclass
class StationaryDistribution:
    probs: np.ndarray  # flat, length m*m
    game: GameParams
    residual: float  # ||v T - v||_1
    iterations: int = 0

    @property
    def matrix(self) -> np.ndarray:
        m = self.game.n_claims
        return self.probs.reshape(m, m)

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        """Claim distributions of player a and player b."""
        return self.matrix.sum(axis=1), self.matrix.sum(axis=0)


def _krylov_guess(TT: sp.csr_matrix) -> np.ndarray | None:
    n = TT.shape[0]
    try:
        _, vecs = spla.eigs(TT, k=1, which="LR", v0=np.full(n, 1.0 / n), tol=1e-15)
    except (spla.ArpackNoConvergence, spla.ArpackError):
        return None
    v = np.abs(vecs[:, 0].real)
    s = v.sum()
    if not (np.isfinite(s) and s > 0):
        return None
    return v / s


def stationary_distribution(
    kernel: TransitionKernel,
    tol: float = 1e-12,
    max_iter: int = 1_000_000,
    warm_start: bool = True,
) -> StationaryDistribution:
    """Stationary vector ``v = v T`` by power iteration, certified to ``tol`` in L1.

    Power iteration starts from the uniform vector.  With ``warm_start`` and
    a uniform vector that is not already stationary, it starts instead from
    an ARPACK estimate of the leading left eigenvector, which cuts the
    iteration count from ~1e5 to ~0 for strongly selective kernels.

    Raises
    ------
    ConvergenceError
        If the residual is still above ``tol`` after ``max_iter`` iterations.
    """
    TT = kernel.matrix.T.tocsr()
    n = TT.shape[0]
    v = np.full(n, 1.0 / n)
    w = TT @ v
    residual = float(np.abs(w - v).sum())
    if residual >= tol and warm_start:
        guess = _krylov_guess(TT)
        if guess is not None:
            v = guess
            w = TT @ v
            residual = float(np.abs(w - v).sum())
    it = 0
    while residual >= tol:
        if it >= max_iter:
            raise ConvergenceError(
                f"power iteration did not reach {tol:g} in {max_iter} iterations", v, residual
            )
        v = w / w.sum()
        w = TT @ v
        residual = float(np.abs(w - v).sum())
        it += 1
    return StationaryDistribution(probs=v, game=kernel.game, residual=residual, iterations=it)


def average_claim(dist: StationaryDistribution) -> float:
    """Expected value of ``(a + b) / 2`` under the distribution."""
    P = dist.matrix
    claims = np.arange(dist.game.lower, dist.game.upper + 1)
    pair_sum = claims[:, None] + claims[None, :]
    # exact summation, normalised by the (exactly summed) total mass
    return math.fsum((P * pair_sum).ravel()) / (2.0 * math.fsum(P.ravel()))


def _sweep_worker(base: GameParams, point: dict) -> dict:
    params = GameParams(base.lower, base.upper, point["R"])
    dist = stationary_distribution(build_transition(params, point["beta"]))
    return {"average_claim": average_claim(dist), "residual": dist.residual}


def sweep_intro(
    R_values: Sequence[int],
    beta_values: Sequence[float],
    params: GameParams,
    threads: int = 1,
) -> SweepResult:
    """Exact average claim over a (reward, beta) grid, R as the outer loop."""
    for beta in beta_values:
        if not (beta >= 0 and math.isfinite(beta)):
            raise ValueError(f"beta must be finite and >= 0, got {beta}")
    points = [{"R": int(R), "beta": float(beta)} for R in R_values for beta in beta_values]
    result = run_parallel(
        points, partial(_sweep_worker, params), ["average_claim", "residual"], threads=threads
    )
    result.metadata.update(
        {"L": params.lower, "U": params.upper, "solver": "power iteration, tol 1e-12"}
    )
    return result

