import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tddyn.game import GameParams
from tddyn.introspection import (
    ConvergenceError,
    IntroConfig,
    StationaryDistribution,
    acceptance_table,
    average_claim,
    build_transition,
    fermi,
    run_intro,
    stationary_distribution,
    step,
    sweep_intro,
)
from tddyn.sweep import make_rng
from tddyn.verification import dense_kernel, dense_stationary_oracle

TD = GameParams(2, 100, 2)
PAIR = GameParams(2, 3, 2)
MID = GameParams(2, 20, 2)


def swap_permutation(m):
    a, b = np.divmod(np.arange(m * m), m)
    return b * m + a


class TestFermi:
    @pytest.mark.parametrize("beta", [0.0, 0.1, 1.0, 50.0, math.inf])
    def test_tie_is_half(self, beta):
        assert fermi(0.0, beta) == 0.5

    @pytest.mark.parametrize("delta", [-100.0, -1.0, 3.0, 98.0])
    def test_no_selection_is_half(self, delta):
        assert fermi(delta, 0.0) == 0.5

    def test_infinite_selection_is_step(self):
        assert fermi(1.0, math.inf) == 1.0
        assert fermi(-1.0, math.inf) == 0.0

    def test_extreme_arguments_saturate(self):
        assert fermi(-1000.0, 10.0) == 0.0
        assert fermi(1000.0, 10.0) == 1.0

    @given(st.floats(-200, 200), st.floats(0, 20))
    def test_complementary(self, d, beta):
        assert fermi(d, beta) + fermi(-d, beta) == pytest.approx(1.0, abs=1e-15)

    def test_negative_beta(self):
        with pytest.raises(ValueError):
            fermi(1.0, -0.5)


class TestStep:
    def test_lowest_pair_absorbing_under_infinite_selection(self):
        cfg = IntroConfig(game=TD, beta=math.inf)
        rng = make_rng(0)
        table = acceptance_table(TD, math.inf)
        state = (2, 2)
        for _ in range(2000):
            state = step(state, cfg, rng, table)
        assert state == (2, 2)

    def test_undercut_always_accepted_under_infinite_selection(self):
        # from (3, 3) proposing 2 raises the mover's payoff from 3 to 4
        assert acceptance_table(PAIR, math.inf)[1, 0, 1] == 1.0
        cfg = IntroConfig(game=PAIR, beta=math.inf)
        rng = make_rng(1)
        seen = set()
        for _ in range(200):
            seen.add(step((3, 3), cfg, rng))
        assert seen == {(3, 3), (2, 3), (3, 2)}

    def test_state_changes_one_player_at_a_time(self):
        cfg = IntroConfig(game=MID, beta=0.3)
        rng = make_rng(2)
        state = (10, 10)
        for _ in range(500):
            new = step(state, cfg, rng)
            assert new[0] == state[0] or new[1] == state[1]
            state = new

    def test_trace_starts_at_initial_state(self):
        cfg = IntroConfig(game=PAIR, beta=1.0, steps=50, seed=3, init=(3, 3))
        trace = run_intro(cfg).trace
        assert trace.shape == (51, 2)
        assert tuple(trace[0]) == (3, 3)

    def test_rejects_out_of_range_state(self):
        with pytest.raises(ValueError):
            step((1, 2), IntroConfig(game=TD), make_rng(0))


class TestRunIntro:
    def test_trace_and_occupancy(self):
        cfg = IntroConfig(game=MID, beta=1.0, steps=20_000, burn_in=5_000, seed=4)
        run = run_intro(cfg)
        assert run.trace.shape == (20_001, 2)
        assert run.occupancy.sum() == 15_000
        assert run.trace.min() >= 2 and run.trace.max() <= 20
        moves = np.abs(np.diff(run.trace, axis=0))
        assert ((moves[:, 0] == 0) | (moves[:, 1] == 0)).all()
        tail = run.trace[5_001:]
        assert run.average_claim == pytest.approx(tail.mean(), rel=1e-12)

    def test_deterministic(self):
        cfg = IntroConfig(game=MID, beta=0.5, steps=5_000, seed=7)
        np.testing.assert_array_equal(run_intro(cfg).trace, run_intro(cfg).trace)

    def test_trace_optional(self):
        cfg = IntroConfig(game=MID, beta=0.5, steps=5_000, seed=7)
        a, b = run_intro(cfg), run_intro(cfg, record_trace=False)
        assert b.trace is None and a.average_claim == b.average_claim

    def test_high_claims_under_strong_selection(self):
        run = run_intro(IntroConfig(game=TD, beta=1.0, steps=400_000, burn_in=50_000, seed=5))
        assert run.average_claim > 80

    def test_weak_selection_spreads_out(self):
        strong = run_intro(IntroConfig(game=TD, beta=1.0, steps=200_000, burn_in=20_000, seed=6))
        weak = run_intro(IntroConfig(game=TD, beta=0.1, steps=200_000, burn_in=20_000, seed=6))
        assert weak.claim_std(2) > 2 * strong.claim_std(2)

    def test_two_claim_game_sticks_to_lowest_pair(self):
        run = run_intro(IntroConfig(game=PAIR, beta=10.0, steps=200_000, burn_in=1_000, seed=8))
        assert run.empirical[0, 0] > 0.99

    @pytest.mark.parametrize("kwargs", [{"beta": -1.0}, {"steps": 0}, {"burn_in": 10, "steps": 10}])
    def test_bad_config(self, kwargs):
        with pytest.raises(ValueError):
            IntroConfig(game=MID, **kwargs)


class TestTransition:
    def test_no_selection_two_claims_by_hand(self):
        # states (2,2), (2,3), (3,2), (3,3); each player moves to the other claim w.p. 1/8
        expected = np.array(
            [
                [3 / 4, 1 / 8, 1 / 8, 0],
                [1 / 8, 3 / 4, 0, 1 / 8],
                [1 / 8, 0, 3 / 4, 1 / 8],
                [0, 1 / 8, 1 / 8, 3 / 4],
            ]
        )
        np.testing.assert_allclose(build_transition(PAIR, 0.0).matrix.toarray(), expected, atol=1e-15)

    def test_full_game_rows_sum_to_one(self):
        P = build_transition(TD, 1.0).matrix
        np.testing.assert_allclose(np.asarray(P.sum(axis=1)).ravel(), 1.0, atol=1e-12)

    def test_leaving_lowest_pair_vanishes_under_strong_selection(self):
        P = build_transition(TD, 60.0).matrix
        out = P[0, 1:].toarray().ravel()
        assert out.max() < 1e-40

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 12), st.integers(2, 15), st.floats(0.0, 5.0))
    def test_stochastic_symmetric_and_matches_dense(self, width, reward, beta):
        params = GameParams(2, 2 + width, reward)
        m = params.n_claims
        P = build_transition(params, beta).matrix.toarray()
        assert P.min() >= 0 and P.max() <= 1
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
        perm = swap_permutation(m)
        np.testing.assert_allclose(P[np.ix_(perm, perm)], P, atol=1e-15)
        if m * m <= 400:
            np.testing.assert_allclose(P, dense_kernel(params, beta), atol=1e-14)

    def test_rejects_infinite_beta(self):
        with pytest.raises(ValueError):
            build_transition(PAIR, math.inf)


class TestStationary:
    def test_two_claims_matches_dense_solve(self):
        dist = stationary_distribution(build_transition(PAIR, 1.0))
        np.testing.assert_allclose(dist.probs, dense_stationary_oracle(PAIR, 1.0), atol=1e-10)

    @pytest.mark.parametrize("params", [PAIR, GameParams(2, 30, 5), TD])
    def test_no_selection_is_uniform(self, params):
        dist = stationary_distribution(build_transition(params, 0.0))
        np.testing.assert_allclose(dist.probs, 1.0 / params.n_claims**2, rtol=1e-12)
        assert dist.iterations == 0

    @pytest.mark.parametrize("beta", [0.2, 1.0, 10.0])
    def test_certified_residual_and_swap_symmetry(self, beta):
        dist = stationary_distribution(build_transition(MID, beta))
        assert dist.residual < 1e-12
        P = dist.matrix
        np.testing.assert_allclose(P, P.T, atol=1e-10)
        pa, pb = dist.marginals()
        np.testing.assert_allclose(pa, pb, atol=1e-10)

    def test_cold_start_agrees_with_warm_start(self):
        kernel = build_transition(GameParams(2, 8, 3), 0.5)
        warm = stationary_distribution(kernel)
        cold = stationary_distribution(kernel, warm_start=False)
        np.testing.assert_allclose(warm.probs, cold.probs, atol=1e-10)
        np.testing.assert_allclose(cold.probs, dense_stationary_oracle(GameParams(2, 8, 3), 0.5), atol=1e-10)

    def test_iteration_cap(self):
        kernel = build_transition(GameParams(2, 8, 3), 0.5)
        with pytest.raises(ConvergenceError) as info:
            stationary_distribution(kernel, max_iter=3, warm_start=False)
        assert info.value.residual > 1e-12
        assert info.value.best.shape == (49,)

    def test_simulation_converges_to_exact(self):
        exact = stationary_distribution(build_transition(MID, 1.0)).matrix

        def tv(steps):
            run = run_intro(IntroConfig(game=MID, beta=1.0, steps=steps, burn_in=steps // 100, seed=10), False)
            return 0.5 * np.abs(run.empirical - exact).sum()

        short, long = tv(100_000), tv(1_000_000)
        assert long < short
        assert long < 0.05


class TestAverageClaim:
    def test_uniform_full_game(self):
        dist = StationaryDistribution(np.full(99 * 99, 1 / 99**2), TD, 0.0)
        assert average_claim(dist) == 51.0

    def test_point_mass(self):
        probs = np.zeros(99 * 99)
        probs[0] = 1.0
        assert average_claim(StationaryDistribution(probs, TD, 0.0)) == 2.0

    def test_trends(self):
        def avg(R, beta):
            return average_claim(stationary_distribution(build_transition(GameParams(2, 100, R), beta)))

        strong, weak, none = avg(2, 1.0), avg(2, 0.1), avg(2, 0.0)
        assert strong > 80
        assert strong > weak > none == 51.0
        assert avg(40, 1.0) < strong


class TestSweep:
    def test_schema_and_rows(self):
        res = sweep_intro([2, 5], [0.0, 1.0], MID)
        assert res.columns == ["R", "beta", "average_claim", "residual"]
        assert [(r["R"], r["beta"]) for r in res.rows] == [(2, 0.0), (2, 1.0), (5, 0.0), (5, 1.0)]
        for r in res.rows:
            assert r["residual"] < 1e-12
            if r["beta"] == 0.0:
                assert r["average_claim"] == 11.0

    def test_rejects_infinite_beta(self):
        with pytest.raises(ValueError):
            sweep_intro([2], [math.inf], MID)
