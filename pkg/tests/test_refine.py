import itertools
import math

import numpy as np
import pytest

from gencircuit.refine import (
    CATEGORY_WIDTHS,
    INPUT_WIDTH,
    MLP_LAYER_SIZES,
    RefineConfig,
    RefineError,
    RewardThresholds,
    composite_reward,
    load_weights,
    mlp_forward,
    one_hot,
    random_weights,
    refine_pool,
    save_weights,
    surrogate_scorer,
    SurrogateWeights,
    validate_composition,
)


class TestComposition:
    def test_widths_sum_to_input(self):
        assert sum(CATEGORY_WIDTHS) == INPUT_WIDTH == 34
        assert len(CATEGORY_WIDTHS) == 10

    def test_one_hot_exactly_one_per_category(self):
        x = one_hot((0,) * 10)
        assert x.sum() == 10
        offset = 0
        for width in CATEGORY_WIDTHS:
            assert x[offset:offset + width].sum() == 1
            offset += width

    def test_out_of_range_rejected(self):
        with pytest.raises(RefineError):
            validate_composition((4, 0, 0, 0, 0, 0, 0, 0, 0, 0))


class TestMlp:
    def test_layer_shapes(self):
        assert MLP_LAYER_SIZES == (34, 160, 80, 40, 20, 2)
        weights = random_weights(0)
        for (w, b), (n_in, n_out) in zip(weights.layers, zip(MLP_LAYER_SIZES, MLP_LAYER_SIZES[1:])):
            assert w.shape == (n_in, n_out)
            assert b.shape == (n_out,)

    def test_zero_weights_give_zero_outputs(self):
        layers = tuple(
            (np.zeros((a, b)), np.zeros(b))
            for a, b in zip(MLP_LAYER_SIZES, MLP_LAYER_SIZES[1:])
        )
        weights = SurrogateWeights(layers=layers)
        assert mlp_forward(weights, one_hot((0,) * 10)) == (0.0, 0.0)

    def test_single_path_matches_scalar_oracle(self):
        # one nonzero path through the network: x[0] -> h1[0] -> ... -> out[0]
        layers = []
        for a, b in zip(MLP_LAYER_SIZES, MLP_LAYER_SIZES[1:]):
            w = np.zeros((a, b))
            w[0, 0] = 0.5
            layers.append((w, np.zeros(b)))
        weights = SurrogateWeights(layers=tuple(layers))
        x = one_hot((0,) * 10)  # x[0] = 1
        got = mlp_forward(weights, x)
        h = 1.0
        for _ in range(4):
            h = math.tanh(0.5 * h)
        assert got[0] == pytest.approx(0.5 * h)
        assert got[1] == 0.0

    def test_deterministic(self):
        weights = random_weights(3)
        x = one_hot((1, 2, 3, 0, 1, 2, 1, 0, 2, 1))
        assert mlp_forward(weights, x) == mlp_forward(weights, x)

    def test_shape_mismatch_rejected(self):
        weights = random_weights(0)
        with pytest.raises(RefineError):
            mlp_forward(weights, np.zeros(33))

    def test_weights_file_round_trip(self, tmp_path):
        weights = random_weights(5)
        path = tmp_path / "weights.txt"
        save_weights(weights, path)
        again = load_weights(path)
        for (w1, b1), (w2, b2) in zip(weights.layers, again.layers):
            np.testing.assert_array_equal(w1, w2)
            np.testing.assert_array_equal(b1, b2)


class TestCompositeReward:
    def test_midpoint_with_clean_basal(self):
        th = RewardThresholds(fc_target=25.0)
        basal = 1e-9
        r = composite_reward((basal, basal * 25.0), th)
        assert r == pytest.approx(0.3 + 0.5 * 0.5 + 0.2, abs=1e-6)
        assert r == pytest.approx(0.75, abs=1e-6)

    def test_all_zero_terms(self):
        th = RewardThresholds(fc_target=25.0)
        # huge basal kills r_basal; fc far below target leaves only the
        # sigmoid tail (sigmoid(-24/5) ~ 8e-3) in r_fc
        r = composite_reward((1e6, 1e6), th, r_topo=0.0)
        assert r == pytest.approx(0.0, abs=5e-3)

    def test_saturation(self):
        th = RewardThresholds(fc_target=25.0)
        r = composite_reward((1e-9, 1.0), th)
        assert r == pytest.approx(1.0, abs=1e-3)

    def test_nonpositive_basal_rejected(self):
        with pytest.raises(RefineError):
            composite_reward((0.0, 1.0))


def _toy_space():
    return (4, 4, 4)


def _toy_scorer(comp):
    # separable with a unique optimum at (3, 0, 2)
    return comp[0] - comp[1] + 2 * (3 - abs(comp[2] - 2))


class TestRefinePool:
    CONFIG = RefineConfig(pool_size=16, elite_frac=0.25, mutation_rate=0.3,
                          fresh_frac=0.10, iterations=8, seed=0)

    def test_reaches_exhaustive_optimum(self):
        widths = _toy_space()
        optimum = max(
            (_toy_scorer(c) for c in itertools.product(*map(range, widths)))
        )
        hits = 0
        for seed in range(40):
            config = RefineConfig(
                pool_size=16, elite_frac=0.25, mutation_rate=0.3,
                fresh_frac=0.10, iterations=8, seed=seed,
            )
            history = refine_pool(config, _toy_scorer, widths)
            if history[-1].best_score == optimum:
                hits += 1
        assert hits >= 38

    def test_best_so_far_monotone(self):
        history = refine_pool(self.CONFIG, _toy_scorer, _toy_space())
        bests = [h.best_score for h in history]
        assert bests == sorted(bests)

    def test_closed_pool_converges_to_elites(self):
        config = RefineConfig(
            pool_size=16, elite_frac=0.25, mutation_rate=0.0,
            fresh_frac=0.0, iterations=6, seed=2,
        )
        history = refine_pool(config, _toy_scorer, _toy_space())
        after = [h.elite_mean for h in history[1:]]
        assert all(x == pytest.approx(after[0]) for x in after)

    def test_constant_scorer_is_stable(self):
        history = refine_pool(self.CONFIG, lambda c: 0.5, _toy_space())
        assert all(h.elite_mean == 0.5 and h.mean_score == 0.5 for h in history)

    def test_pool_size_exact_every_iteration(self):
        count = 0

        def counting(comp):
            nonlocal count
            count += 1
            return _toy_scorer(comp)

        config = RefineConfig(pool_size=23, elite_frac=0.2, iterations=5, seed=4)
        history = refine_pool(config, counting, _toy_space())
        assert len(history) == 5
        assert count == 23 * 5  # every iteration scores exactly pool_size members

    def test_surrogate_scorer_progresses(self):
        """Soft trend check: with the synthetic surrogate, elite mean rises in
        at least 90% of adjacent iteration pairs across seeds."""
        good = 0
        total = 0
        for seed in range(20):
            weights = random_weights(seed)
            scorer = surrogate_scorer(weights)
            config = RefineConfig(
                pool_size=60, elite_frac=0.15, mutation_rate=0.3,
                fresh_frac=0.10, iterations=8, seed=seed,
            )
            history = refine_pool(config, scorer)
            for a, b in zip(history, history[1:]):
                total += 1
                if b.elite_mean >= a.elite_mean - 1e-12:
                    good += 1
        assert good / total >= 0.90

    def test_config_validation(self):
        with pytest.raises(RefineError):
            RefineConfig(pool_size=4, elite_frac=0.1)  # elite count would be 0
        with pytest.raises(RefineError):
            RefineConfig(mutation_rate=1.5)
