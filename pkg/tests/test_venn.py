from collections import Counter, defaultdict

import numpy as np
import pytest

import vennpredict.venn as venn_module
from vennpredict.data import Dataset
from vennpredict.mlp import MLPConfig, forward, train_with_restarts
from vennpredict.synth import gaussian_classes
from vennpredict.taxonomy import TaxonomyRule, category_of
from vennpredict.venn import (
    VennPredictor,
    aggregate,
    multiprobability,
    multiprobability_from_outputs,
    predict_one,
    transduce,
)

from conftest import separable_toy

FAST = dict(num_restarts=1, max_epochs=60, patience=10)


class TestAggregate:
    def test_two_class_hand_example(self):
        result = aggregate(np.array([[0.9, 0.1], [0.6, 0.4]]))
        assert result.predicted == 0
        np.testing.assert_allclose(result.mean_probs, [0.75, 0.25])
        assert result.interval == (0.6, 0.9)
        np.testing.assert_allclose(result.error_interval, (0.1, 0.4))

    def test_identical_rows_give_zero_width_intervals(self):
        row = np.array([0.2, 0.5, 0.3])
        result = aggregate(np.tile(row, (3, 1)))
        np.testing.assert_array_equal(result.lower, result.upper)
        np.testing.assert_array_equal(result.lower, row)

    def test_mean_probabilities_sum_to_one(self, rng):
        for _ in range(100):
            P = rng.dirichlet(np.ones(4), size=4)
            assert abs(aggregate(P).mean_probs.sum() - 1.0) < 1e-12

    def test_interval_ordering_on_randomized_inputs(self, rng):
        for _ in range(1000):
            c = int(rng.integers(2, 6))
            P = rng.dirichlet(rng.uniform(0.3, 3.0, size=c), size=c)
            result = aggregate(P)
            assert np.all(result.lower >= 0.0)
            assert np.all(result.lower <= result.mean_probs + 1e-15)
            assert np.all(result.mean_probs <= result.upper + 1e-15)
            assert np.all(result.upper <= 1.0)
            assert result.predicted == int(np.argmax(result.mean_probs))

    def test_non_stochastic_matrix_rejected(self):
        with pytest.raises(ValueError, match="probability"):
            aggregate(np.array([[0.9, 0.2], [0.5, 0.5]]))


def recount_distribution(outputs_k, y_extended, rule, n_classes):
    """Independent tally: bucket all pairs by key, then count labels in the new pair's bucket."""
    buckets = defaultdict(list)
    for i, output in enumerate(outputs_k):
        buckets[category_of(rule, output)].append(i)
    members = buckets[category_of(rule, outputs_k[-1])]
    tally = Counter(int(y_extended[i]) for i in members)
    assert sum(tally.values()) == len(members)
    return np.array([tally.get(j, 0) / len(members) for j in range(n_classes)])


class TestMultiprobabilityFromOutputs:
    def make_outputs(self, rng, c, l):
        return rng.dirichlet(np.full(c, 0.7), size=(c, l + 1))

    def test_singleton_category_is_point_mass(self):
        # new example's argmax class 2; every training example's argmax is 0
        outputs = np.zeros((3, 4, 3))
        outputs[:, :, 0] = 0.8
        outputs[:, :, 1] = 0.15
        outputs[:, :, 2] = 0.05
        outputs[:, -1] = [0.1, 0.2, 0.7]
        P = multiprobability_from_outputs(outputs, np.array([0, 1, 2]), TaxonomyRule("v1"))
        for k in range(3):
            expected = np.zeros(3)
            expected[k] = 1.0
            np.testing.assert_array_equal(P[k], expected)

    def test_three_member_category_frequencies(self):
        # candidate row where the category holds labels (0, 0, 1) including the new pair
        outputs = np.zeros((2, 4, 2))
        outputs[:, :, 0] = 0.9
        outputs[:, :, 1] = 0.1
        outputs[0, 1] = [0.1, 0.9]  # example 1 lands in the other category
        P = multiprobability_from_outputs(outputs, np.array([0, 1, 1]), TaxonomyRule("v1"))
        np.testing.assert_allclose(P[0], [2 / 3, 1 / 3])

    def test_matches_brute_force_recount_on_random_instances(self, rng):
        rules = [TaxonomyRule(kind) for kind in ("v1", "v2", "v3", "v4", "v5")]
        for trial in range(50):
            c = int(rng.integers(2, 5))
            l = int(rng.integers(3, 12))
            outputs = self.make_outputs(rng, c, l)
            y_train = rng.integers(0, c, size=l)
            rule = rules[trial % len(rules)]
            P = multiprobability_from_outputs(outputs, y_train, rule)
            np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)
            assert P.min() >= 0.0 and P.max() <= 1.0
            for k in range(c):
                expected = recount_distribution(
                    outputs[k], np.concatenate([y_train, [k]]), rule, c
                )
                np.testing.assert_allclose(P[k], expected, atol=1e-12)

    def test_shape_mismatch_rejected(self, rng):
        outputs = self.make_outputs(rng, 3, 5)
        with pytest.raises(ValueError, match="examples"):
            multiprobability_from_outputs(outputs, np.zeros(9, dtype=int), TaxonomyRule("v1"))


class TestPredictPipeline:
    def toy(self):
        return separable_toy(12, seed=21)

    def test_one_training_per_candidate_label(self, monkeypatch):
        ds = gaussian_classes([8, 8, 8], 2, seed=3, separation=3.0)
        calls = []
        real = train_with_restarts

        def counting(config, X, y, n_classes):
            calls.append(n_classes)
            return real(config, X, y, n_classes)

        monkeypatch.setattr(venn_module, "train_with_restarts", counting)
        config = MLPConfig(hidden_units=3, seed=0, **FAST)
        predict_one(ds, np.zeros(2), TaxonomyRule("v1"), config)
        assert len(calls) == 3

    def test_multiprobability_rows_are_distributions(self):
        ds = self.toy()
        config = MLPConfig(hidden_units=3, seed=1, **FAST)
        P = multiprobability(ds, np.array([1.0, 0.0]), TaxonomyRule("v1"), config)
        assert P.shape == (2, 2)
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)

    def test_result_orders_lower_mean_upper(self):
        ds = self.toy()
        config = MLPConfig(hidden_units=3, seed=2, **FAST)
        for x in ([1.2, 0.3], [-0.9, -0.4], [0.6, 0.9]):
            result = predict_one(ds, np.array(x), TaxonomyRule("v3"), config)
            assert np.all(result.lower <= result.mean_probs + 1e-15)
            assert np.all(result.mean_probs <= result.upper + 1e-15)

    def test_agrees_with_plain_network_far_from_boundary(self):
        ds = self.toy()
        config = MLPConfig(hidden_units=4, seed=5, **FAST)
        model = train_with_restarts(config, ds.X, ds.y, 2)
        rule = TaxonomyRule("v1")
        for x in ([1.3, 0.0], [-1.3, 0.5], [1.1, -0.8], [-1.2, -0.2]):
            x = np.array(x)
            nn_choice = int(np.argmax(forward(model, x)))
            assert predict_one(ds, x, rule, config).predicted == nn_choice

    def test_transduction_is_seed_deterministic(self):
        ds = self.toy()
        config = MLPConfig(hidden_units=3, seed=9, **FAST)
        a = transduce(ds, np.array([0.4, -0.2]), config)
        b = transduce(ds, np.array([0.4, -0.2]), config)
        np.testing.assert_array_equal(a, b)

    def test_attribute_count_mismatch_rejected(self):
        ds = self.toy()
        config = MLPConfig(hidden_units=3, seed=0, **FAST)
        with pytest.raises(ValueError, match="attributes"):
            transduce(ds, np.zeros(5), config)


class TestVennPredictorEstimator:
    def test_fit_predict_with_string_labels(self):
        ds = gaussian_classes([15, 15], 3, seed=4, separation=4.0)
        labels = np.array(["no", "yes"])[ds.y]
        predictor = VennPredictor(taxonomy="v1", hidden_units=3, n_restarts=1, max_epochs=50, patience=10)
        predictor.fit(ds.X, labels)
        predictions = predictor.predict(ds.X[:6])
        assert set(predictions) <= {"no", "yes"}
        assert (predictions == labels[:6]).mean() >= 0.5

    def test_predict_proba_rows_sum_to_one(self):
        ds = gaussian_classes([12, 12], 2, seed=6, separation=4.0)
        predictor = VennPredictor(hidden_units=3, n_restarts=1, max_epochs=40, patience=8)
        predictor.fit(ds.X, ds.y)
        probs = predictor.predict_proba(ds.X[:4])
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_intervals_bound_mean_probability(self):
        ds = gaussian_classes([12, 12], 2, seed=8, separation=3.0, label_noise=0.1)
        predictor = VennPredictor(taxonomy="v2", hidden_units=3, n_restarts=1, max_epochs=40, patience=8)
        predictor.fit(ds.X, ds.y)
        for result in predictor.predict_full(ds.X[:5]):
            low, high = result.interval
            assert low <= result.mean_probs[result.predicted] <= high

    def test_get_params_round_trip(self):
        predictor = VennPredictor(taxonomy="v4", theta=0.4, hidden_units=7)
        params = predictor.get_params()
        clone = VennPredictor(**params)
        assert clone.taxonomy == "v4"
        assert clone.theta == 0.4
        assert clone.hidden_units == 7

    def test_result_serializes_to_json_dict(self):
        ds = gaussian_classes([10, 10], 2, seed=1, separation=4.0)
        predictor = VennPredictor(hidden_units=3, n_restarts=1, max_epochs=30, patience=5)
        predictor.fit(ds.X, ds.y)
        payload = predictor.predict_full(ds.X[:1])[0].to_dict(predictor.classes_)
        assert set(payload) == {"predicted", "mean_probs", "intervals", "error_interval"}
        assert len(payload["intervals"]) == 2
