import itertools
import json
import math

import numpy as np
import pytest

from potlab.catalog import battle_of_sexes, matching_pennies, prisoners_dilemma
from potlab.games import (
    GameError,
    GameShape,
    MixedProfile,
    NormalFormGame,
    best_response,
    derive_seed,
    expected_utility,
    game_from_json,
    game_to_json,
    parse_setting,
    payoff_gradient,
    pure_equilibria,
    relative_utility_loss,
    sample_random_game,
)


def mixed(*vecs):
    return MixedProfile(tuple(np.asarray(v, dtype=float) for v in vecs))


class TestGameShape:
    def test_rejects_single_player(self):
        with pytest.raises(GameError):
            GameShape(1, (3,))

    def test_rejects_single_action(self):
        with pytest.raises(GameError):
            GameShape.of((2, 1))

    def test_rejects_mismatched_count(self):
        with pytest.raises(GameError):
            GameShape(3, (2, 2))

    def test_totals(self):
        s = GameShape.of((2, 3, 4))
        assert s.total_profiles == 24
        assert s.total_edges == 24 // 2 * (1 + 2 + 3)

    def test_profile_index_examples(self):
        s22 = GameShape.of((2, 2))
        assert s22.profile_index((0, 0)) == 0
        assert s22.profile_index((1, 0)) == 2
        s23 = GameShape.of((2, 3))
        assert s23.profile_index((1, 2)) == 5

    def test_out_of_range_action_rejected(self):
        with pytest.raises(GameError):
            GameShape.of((2, 2)).profile_index((0, 2))

    @pytest.mark.parametrize(
        "actions",
        [(2, 2), (3, 5), (7, 7), (2, 3, 4), (5, 5, 5), (2, 2, 2, 2), (7, 7, 7, 7), (3, 7, 2, 5)],
    )
    def test_index_bijection(self, actions):
        s = GameShape.of(actions)
        for idx in range(s.total_profiles):
            assert s.profile_index(s.profile_from_index(idx)) == idx

    def test_all_profiles_matches_index_order(self):
        s = GameShape.of((2, 3, 2))
        profiles = s.all_profiles()
        for idx in range(s.total_profiles):
            assert tuple(profiles[idx]) == s.profile_from_index(idx)

    def test_setting_label_roundtrip(self):
        assert parse_setting("2x10").actions == (10, 10)
        assert parse_setting("3x2").actions == (2, 2, 2)
        assert parse_setting("2x3-4").actions == (3, 4)
        s = GameShape.of((10, 10))
        assert parse_setting(s.setting_label()) == s


class TestNormalFormGame:
    def test_payoff_shape_validated(self):
        with pytest.raises(GameError):
            NormalFormGame(GameShape.of((2, 2)), np.zeros((2, 5)))

    def test_nonfinite_rejected(self):
        p = np.zeros((2, 4))
        p[0, 1] = np.inf
        with pytest.raises(GameError):
            NormalFormGame(GameShape.of((2, 2)), p)

    def test_payoffs_immutable(self):
        g = matching_pennies()
        with pytest.raises(ValueError):
            g.payoffs[0, 0] = 5.0

    def test_from_matrices_matches_manual_indexing(self):
        u1 = np.arange(6.0).reshape(2, 3)
        g = NormalFormGame.from_payoff_matrices([u1, -u1])
        assert g.payoff(0, (1, 2)) == 5.0
        assert g.payoff(1, (1, 2)) == -5.0

    def test_json_roundtrip_exact(self):
        rng = np.random.default_rng(3)
        g = sample_random_game(GameShape.of((3, 4)), 17)
        g2 = game_from_json(game_to_json(g))
        assert g2.shape == g.shape
        assert np.array_equal(g2.payoffs, g.payoffs)

    def test_json_schema_fields(self):
        doc = json.loads(game_to_json(matching_pennies()))
        assert doc["players"] == 2
        assert doc["actions"] == [2, 2]
        assert len(doc["payoffs"]) == 2 and len(doc["payoffs"][0]) == 4


def naive_equilibria(game):
    """Independent oracle: plain double loop over profiles and deviations."""
    shape = game.shape
    pure, strict = [], []
    for profile in itertools.product(*[range(m) for m in shape.actions]):
        is_ne, is_strict = True, True
        for i in range(shape.num_players):
            own = game.payoff(i, profile)
            for k in range(shape.actions[i]):
                if k == profile[i]:
                    continue
                dev = list(profile)
                dev[i] = k
                other = game.payoff(i, dev)
                if other > own:
                    is_ne = False
                if other >= own:
                    is_strict = False
        if is_ne:
            pure.append(profile)
        if is_strict:
            strict.append(profile)
    return pure, strict


class TestPureEquilibria:
    def test_prisoners_dilemma(self):
        rep = pure_equilibria(prisoners_dilemma())
        assert rep.pure_ne == [(1, 1)]
        assert rep.strict_pure_ne == [(1, 1)]

    def test_matching_pennies_has_none(self):
        rep = pure_equilibria(matching_pennies())
        assert rep.pure_ne == []

    def test_battle_of_sexes_two_strict(self):
        rep = pure_equilibria(battle_of_sexes())
        assert rep.strict_pure_ne == [(0, 0), (1, 1)]

    def test_strict_subset_of_pure(self):
        for seed in range(20):
            g = sample_random_game(GameShape.of((3, 3)), seed)
            rep = pure_equilibria(g)
            assert set(rep.strict_pure_ne) <= set(rep.pure_ne)

    @pytest.mark.parametrize("actions", [(2, 2), (2, 3), (3, 2), (3, 3)])
    def test_matches_naive_oracle_on_random_games(self, actions):
        shape = GameShape.of(actions)
        for seed in range(60):
            g = sample_random_game(shape, derive_seed(123, *actions, seed))
            rep = pure_equilibria(g)
            pure, strict = naive_equilibria(g)
            assert rep.pure_ne == pure
            assert rep.strict_pure_ne == strict

    @pytest.mark.parametrize("actions", [(2, 2), (3, 3)])
    def test_matches_naive_oracle_with_ties(self, actions):
        # integer payoffs force exact ties, stressing weak-inequality handling
        shape = GameShape.of(actions)
        rng = np.random.default_rng(7)
        for _ in range(60):
            payoffs = rng.integers(0, 3, (shape.num_players, shape.total_profiles)).astype(float)
            g = NormalFormGame(shape, payoffs)
            rep = pure_equilibria(g)
            pure, strict = naive_equilibria(g)
            assert rep.pure_ne == pure
            assert rep.strict_pure_ne == strict


class TestPayoffGradient:
    def test_pure_opponent_selects_column(self):
        u1 = np.array([[1.0, 2.0], [3.0, 4.0]])
        g = NormalFormGame.from_payoff_matrices([u1, np.zeros((2, 2))])
        s = mixed([0.5, 0.5], [0.0, 1.0])
        assert np.allclose(payoff_gradient(g, s, 0), u1[:, 1])

    def test_uniform_matching_pennies_is_zero(self):
        g = matching_pennies()
        s = mixed([0.5, 0.5], [0.5, 0.5])
        assert np.allclose(payoff_gradient(g, s, 0), 0.0)
        assert np.allclose(payoff_gradient(g, s, 1), 0.0)

    def test_direct_expectation_example(self):
        u1 = np.array([[1.0, 0.0], [0.0, 0.0]])
        g = NormalFormGame.from_payoff_matrices([u1, np.zeros((2, 2))])
        s = mixed([0.5, 0.5], [0.25, 0.75])
        assert np.allclose(payoff_gradient(g, s, 0), [0.25, 0.0])

    def test_vertex_gradient_equals_raw_payoffs(self):
        shape = GameShape.of((3, 2, 2))
        g = sample_random_game(shape, 5)
        profile = (1, 0, 1)
        vecs = []
        for i, m in enumerate(shape.actions):
            v = np.zeros(m)
            v[profile[i]] = 1.0
            vecs.append(v)
        s = MixedProfile(tuple(vecs))
        for i in range(3):
            grad = payoff_gradient(g, s, i)
            for k in range(shape.actions[i]):
                dev = list(profile)
                dev[i] = k
                assert grad[k] == pytest.approx(g.payoff(i, dev), abs=0)

    def test_affine_shift_moves_gradient_uniformly(self):
        shape = GameShape.of((3, 3))
        g = sample_random_game(shape, 11)
        shifted = NormalFormGame(shape, g.payoffs + np.array([[5.0], [0.0]]))
        s = mixed([0.2, 0.3, 0.5], [0.6, 0.1, 0.3])
        base = payoff_gradient(g, s, 0)
        moved = payoff_gradient(shifted, s, 0)
        assert np.allclose(moved - base, 5.0)
        assert best_response(g, s, 0) == best_response(shifted, s, 0)
        assert pure_equilibria(g).pure_ne == pure_equilibria(shifted).pure_ne


class TestRelativeUtilityLoss:
    def test_zero_at_strict_equilibrium(self):
        g = prisoners_dilemma()
        s = mixed([0.0, 1.0], [0.0, 1.0])
        for i in range(2):
            assert relative_utility_loss(g, s, i) == pytest.approx(0.0, abs=1e-15)

    def test_half_when_value_is_half_of_best(self):
        u1 = np.array([[2.0, 2.0], [1.0, 1.0]])
        g = NormalFormGame.from_payoff_matrices([u1, np.zeros((2, 2))])
        s = mixed([0.0, 1.0], [0.5, 0.5])  # plays the worse row
        assert relative_utility_loss(g, s, 0) == pytest.approx(0.5)

    def test_zero_best_response_falls_back_to_absolute(self):
        # all-pay auction against an opponent bidding the full value: the
        # best response value is exactly 0 (bid nothing), so the ratio is
        # undefined and the absolute loss b - c is returned
        bids = np.array([0.0, 0.5, 1.0])
        u1 = np.zeros((3, 3))
        u2 = np.zeros((3, 3))
        for i, b1 in enumerate(bids):
            for j, b2 in enumerate(bids):
                x1 = 1.0 if b1 > b2 else (0.5 if b1 == b2 else 0.0)
                u1[i, j] = x1 * 1.0 - b1
                u2[i, j] = (1.0 - x1) * 1.0 - b2
        g = NormalFormGame.from_payoff_matrices([u1, u2])
        s = mixed([1.0, 0.0, 0.0], [0.0, 0.0, 1.0])  # P1 bids 0, P2 bids 1.0
        v = payoff_gradient(g, s, 0)
        assert v.max() == pytest.approx(0.0, abs=0)
        expected_abs = float(v.max()) - expected_utility(g, s, 0)
        assert relative_utility_loss(g, s, 0) == pytest.approx(expected_abs, abs=0)

    def test_nonnegative_with_negative_payoffs(self):
        g = prisoners_dilemma()  # all payoffs <= 0
        s = mixed([0.5, 0.5], [0.5, 0.5])
        assert relative_utility_loss(g, s, 0) > 0.0


class TestRandomGames:
    def test_deterministic_per_seed(self):
        shape = GameShape.of((3, 3))
        a = sample_random_game(shape, 99)
        b = sample_random_game(shape, 99)
        assert np.array_equal(a.payoffs, b.payoffs)

    def test_payoffs_in_unit_interval(self):
        g = sample_random_game(GameShape.of((4, 4)), 1)
        assert g.payoffs.min() >= 0.0 and g.payoffs.max() <= 1.0

    def test_pure_ne_frequency_matches_best_response_oracle(self):
        # Independent Monte Carlo oracle: draw best-response maps directly
        # (each uniform over actions) and check for a fixed point. For 2x2
        # iid payoffs the two statistics estimate the same probability.
        n = 10_000
        shape = GameShape.of((2, 2))
        freq = np.mean(
            [
                pure_equilibria(sample_random_game(shape, derive_seed(42, 2, 2, i))).has_pure_ne
                for i in range(n)
            ]
        )
        rng = np.random.default_rng(4242)
        br1 = rng.integers(0, 2, (n, 2))  # best row per column
        br2 = rng.integers(0, 2, (n, 2))  # best column per row
        oracle_hits = [
            any(br1[k][j] == i and br2[k][i] == j for i in range(2) for j in range(2))
            for k in range(n)
        ]
        oracle = np.mean(oracle_hits)
        se = math.sqrt(oracle * (1 - oracle) / n) + math.sqrt(freq * (1 - freq) / n)
        assert abs(freq - oracle) <= 3 * se

    def test_derive_seed_is_stable(self):
        assert derive_seed(0, 1, 2, 2, 2, 0) == derive_seed(0, 1, 2, 2, 2, 0)
        assert derive_seed(0, 1, 2, 2, 2, 0) != derive_seed(0, 1, 2, 2, 2, 1)
        assert derive_seed(1, 1, 2, 2, 2, 0) != derive_seed(0, 1, 2, 2, 2, 0)


class TestMixedProfile:
    def test_rejects_bad_sum(self):
        with pytest.raises(GameError):
            mixed([0.5, 0.6], [0.5, 0.5])

    def test_rejects_negative(self):
        with pytest.raises(GameError):
            mixed([-0.1, 1.1], [0.5, 0.5])
