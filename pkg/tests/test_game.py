import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tddyn.game import (
    DomainError,
    GameParams,
    SubgameKind,
    build_payoff_matrix,
    classify_subgame,
    iterated_elimination,
    payoff,
)
from tddyn.verification import nash_enumeration_oracle

TD = GameParams(2, 100, 2)


@st.composite
def small_games(draw):
    lower = draw(st.integers(0, 30))
    upper = draw(st.integers(lower + 1, lower + 25))
    reward = draw(st.integers(2, 12))
    return GameParams(lower, upper, reward)


class TestGameParams:
    def test_defaults_are_original_game(self):
        assert (TD.lower, TD.upper, TD.reward) == (2, 100, 2)
        assert TD.n_claims == 99

    @pytest.mark.parametrize("lower,upper,reward", [(5, 5, 2), (6, 5, 2), (-1, 5, 2), (2, 10, 1), (2, 10, 0)])
    def test_invalid(self, lower, upper, reward):
        with pytest.raises(ValueError):
            GameParams(lower, upper, reward)


class TestPayoff:
    def test_equal_claims(self):
        assert payoff(50, 50, TD) == 50

    def test_extreme_claims(self):
        assert payoff(2, 100, TD) == 4
        assert payoff(100, 2, TD) == 0

    def test_adjacent_claims(self):
        assert payoff(99, 100, TD) == 101
        assert payoff(100, 99, TD) == 97

    @pytest.mark.parametrize("own,other", [(1, 50), (50, 101), (0, 0)])
    def test_outside_action_space(self, own, other):
        with pytest.raises(DomainError):
            payoff(own, other, TD)

    @given(small_games(), st.data())
    def test_undercut_gap_is_twice_reward(self, params, data):
        a = data.draw(st.integers(params.lower, params.upper - 1))
        b = data.draw(st.integers(a + 1, params.upper))
        assert payoff(a, b, params) - payoff(b, a, params) == 2 * params.reward

    @given(small_games(), st.data())
    def test_stairway_step_is_profitable(self, params, data):
        b = data.draw(st.integers(params.lower + 1, params.upper))
        assert payoff(b - 1, b, params) == b - 1 + params.reward > payoff(b, b, params) == b


class TestPayoffMatrix:
    def test_original_game_shape_and_diagonal(self):
        M = build_payoff_matrix(TD)
        assert M.shape == (99, 99)
        np.testing.assert_array_equal(np.diag(M), np.arange(2, 101))

    def test_two_claims(self):
        np.testing.assert_array_equal(build_payoff_matrix(GameParams(2, 3, 2)), [[2, 4], [0, 3]])

    def test_integer_dtype(self):
        assert build_payoff_matrix(TD).dtype.kind == "i"

    @settings(max_examples=30)
    @given(small_games())
    def test_matches_payoff_everywhere(self, params):
        M = build_payoff_matrix(params)
        for i, a in enumerate(params.claims):
            for j, b in enumerate(params.claims):
                assert M[i, j] == payoff(int(a), int(b), params)

    @given(small_games())
    def test_off_diagonal_structure(self, params):
        M = build_payoff_matrix(params)
        L, R = params.lower, params.reward
        i, j = np.triu_indices(params.n_claims, k=1)
        np.testing.assert_array_equal(M[i, j], L + i + R)
        np.testing.assert_array_equal(M[j, i], L + i - R)


class TestClassifySubgame:
    def test_extremes_form_coordination_game(self):
        c = classify_subgame(2, 98, TD)
        assert c.kind is SubgameKind.COORDINATION
        assert c.high_equilibrium_payoff_dominant
        assert c.high_equilibrium_risk_dominant

    def test_adjacent_claims_form_prisoners_dilemma(self):
        assert classify_subgame(5, 1, TD).kind is SubgameKind.PRISONERS_DILEMMA

    def test_reward_four(self):
        params = GameParams(2, 100, 4)
        for n in range(2, 100):
            for s in range(1, 101 - n):
                kind = classify_subgame(n, s, params).kind
                expected = SubgameKind.PRISONERS_DILEMMA if s <= 3 else SubgameKind.COORDINATION
                assert kind is expected, (n, s)

    def test_boundary_gap_is_weak_coordination(self):
        c = classify_subgame(10, 2, TD)
        assert c.kind is SubgameKind.COORDINATION
        # deviation loss D - B is zero at s = R
        assert not c.high_equilibrium_risk_dominant

    def test_risk_dominance_needs_gap_above_twice_reward(self):
        assert not classify_subgame(10, 4, TD).high_equilibrium_risk_dominant
        assert classify_subgame(10, 5, TD).high_equilibrium_risk_dominant

    @pytest.mark.parametrize("base,gap", [(99, 2), (2, 0), (1, 3), (50, -1)])
    def test_domain_errors(self, base, gap):
        with pytest.raises(DomainError):
            classify_subgame(base, gap, TD)


class TestIteratedElimination:
    def test_original_game(self):
        assert iterated_elimination(TD) == {2}

    def test_two_claims(self):
        assert iterated_elimination(GameParams(2, 3, 2)) == {2}
        assert iterated_elimination(GameParams(2, 3, 2), "strict") == {2}

    def test_other_interval(self):
        params = GameParams(7, 20, 3)
        assert iterated_elimination(params) == {7}
        assert nash_enumeration_oracle(params) == {(7, 7)}

    def test_strict_dominance_stalls_on_wide_action_space(self):
        # the top claim only ties with the next one against low opponent claims
        assert iterated_elimination(GameParams(2, 6, 2), "strict") == set(range(2, 7))

    def test_bad_criterion(self):
        with pytest.raises(ValueError):
            iterated_elimination(TD, "never-best-response")

    @settings(max_examples=40, deadline=None)
    @given(small_games())
    def test_survivor_is_lowest_claim(self, params):
        assert iterated_elimination(params) == {params.lower}
        assert nash_enumeration_oracle(params) == {(params.lower, params.lower)}
