"""Brute-force oracles for small instances.

None of these reuse the optimised code paths they check: payoffs are
recomputed from the rule with plain integer arithmetic, kernels are built
branch by branch and stationary vectors come from a dense linear solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .game import GameParams


def _rule(own: int, other: int, reward: int) -> int:
    if own == other:
        return own
    return own + reward if own < other else other - reward


def _accept(gain: float, beta: float) -> float:
    # numerically safe logistic, written out independently of scipy.special
    z = beta * gain
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@dataclass
class OracleReport:
    name: str
    instance: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: {self.instance} "
            f"max deviation {self.deviation:.3e} (tolerance {self.tolerance:.1e})"
        )


def dense_kernel(params: GameParams, beta: float) -> np.ndarray:
    """Dense introspection kernel enumerated branch by branch."""
    L, U, R = params.lower, params.upper, params.reward
    m = U - L + 1
    if m * m > 400:
        raise ValueError(f"dense oracle limited to m^2 <= 400, got {m * m}")
    P = np.zeros((m * m, m * m))
    for a in range(L, U + 1):
        for b in range(L, U + 1):
            src = (a - L) * m + (b - L)
            for player in (0, 1):
                for alt in range(L, U + 1):
                    branch = 0.5 * (1.0 / m)
                    if player == 0:
                        gain = _rule(alt, b, R) - _rule(a, b, R)
                        dst = (alt - L) * m + (b - L)
                    else:
                        gain = _rule(alt, a, R) - _rule(b, a, R)
                        dst = (a - L) * m + (alt - L)
                    p = _accept(gain, beta)
                    P[src, dst] += branch * p
                    P[src, src] += branch * (1.0 - p)
    return P


def dense_stationary_oracle(params: GameParams, beta: float) -> np.ndarray:
    """Stationary distribution of the dense kernel from a linear solve.

    Solves ``(P^T - I) v = 0`` with one equation replaced by ``sum(v) = 1``.
    Returns the flat vector indexed like the sparse solver.
    """
    if not math.isfinite(beta):
        raise ValueError("infinite beta makes the chain reducible; outside oracle scope")
    P = dense_kernel(params, beta)
    n = P.shape[0]
    M = P.T - np.eye(n)
    M[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        v = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular stationary system: {exc}") from exc
    return v


def pairwise_payoff_oracle(pop, params: GameParams) -> np.ndarray:
    """Accumulated payoff of each individual by an O(N^2) double loop."""
    claims = [int(c) for c in pop]
    if len(claims) > 1000:
        raise ValueError("pairwise oracle limited to N <= 1000")
    out = []
    for k, own in enumerate(claims):
        total = 0
        for l, other in enumerate(claims):
            if l != k:
                total += _rule(own, other, params.reward)
        out.append(total)
    return np.array(out, dtype=np.int64)


def nash_enumeration_oracle(params: GameParams) -> set[tuple[int, int]]:
    """All pure Nash equilibria by exhaustive best-response checks."""
    L, U, R = params.lower, params.upper, params.reward
    if U - L + 1 > 200:
        raise ValueError("Nash enumeration limited to m <= 200")
    claims = range(L, U + 1)
    best = {}
    for other in claims:
        best[other] = max(_rule(c, other, R) for c in claims)
    return {
        (a, b)
        for a in claims
        for b in claims
        if _rule(a, b, R) == best[b] and _rule(b, a, R) == best[a]
    }


def run_battery() -> list[OracleReport]:
    """Cross-check every optimised routine against its oracle."""
    from .game import build_payoff_matrix, iterated_elimination, payoff
    from .introspection import build_transition, stationary_distribution
    from .wright_fisher import accumulated_payoffs

    reports = []

    for L, U, R in [(2, 3, 2), (2, 5, 2), (2, 12, 3), (0, 15, 4)]:
        params = GameParams(L, U, R)
        matrix = build_payoff_matrix(params)
        dev = max(
            abs(int(matrix[i - L, j - L]) - _rule(i, j, R))
            for i in range(L, U + 1)
            for j in range(L, U + 1)
        )
        reports.append(OracleReport("payoff_matrix", f"[{L},{U}] R={R}", float(dev), 0.0))
        dev = max(abs(payoff(i, j, params) - _rule(i, j, R)) for i in range(L, U + 1) for j in range(L, U + 1))
        reports.append(OracleReport("payoff", f"[{L},{U}] R={R}", float(dev), 0.0))

    for L, U, R in [(2, 100, 2), (2, 3, 2), (7, 20, 3)]:
        params = GameParams(L, U, R)
        nash = nash_enumeration_oracle(params)
        survivors = iterated_elimination(params)
        ok = nash == {(L, L)} and survivors == {L}
        reports.append(
            OracleReport("nash_vs_elimination", f"[{L},{U}] R={R}", 0.0 if ok else 1.0, 0.0)
        )

    rng = np.random.default_rng(12345)
    for N, (L, U, R) in [(2, (2, 100, 2)), (50, (2, 20, 3)), (100, (2, 100, 2))]:
        params = GameParams(L, U, R)
        pop = rng.integers(L, U + 1, size=N)
        dev = np.abs(accumulated_payoffs(pop, params) - pairwise_payoff_oracle(pop, params)).max()
        reports.append(OracleReport("accumulated_payoffs", f"N={N} [{L},{U}] R={R}", float(dev), 0.0))

    for L, U, R, beta in [(2, 3, 2, 0.0), (2, 3, 2, 1.0), (2, 3, 2, 10.0), (2, 5, 2, 1.0), (2, 8, 3, 0.5)]:
        params = GameParams(L, U, R)
        exact = dense_stationary_oracle(params, beta)
        dist = stationary_distribution(build_transition(params, beta))
        dev = np.abs(dist.probs - exact).max()
        reports.append(
            OracleReport("stationary_distribution", f"[{L},{U}] R={R} beta={beta}", float(dev), 1e-10)
        )
    return reports
