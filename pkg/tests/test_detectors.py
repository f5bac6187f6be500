"""The seven black-box detectors: contracts, oracles, determinism."""

import numpy as np
import pytest

from evadegan import detectors
from evadegan.detectors import (
    ALGORITHMS,
    LABEL_ATTACK,
    LABEL_NORMAL,
    SchemaMismatch,
    SingleClassData,
    fit,
    load_model,
    predict,
    save_model,
)


@pytest.fixture(scope="module")
def toy_data():
    """Two well-separated Gaussian blobs in 41 dims."""
    rng = np.random.default_rng(1234)
    n = 120
    normal = rng.normal(0.25, 0.05, size=(n, 41)).clip(0, 1)
    attack = rng.normal(0.75, 0.05, size=(n, 41)).clip(0, 1)
    X = np.vstack([normal, attack])
    y = np.array([LABEL_NORMAL] * n + [LABEL_ATTACK] * n)
    return X, y


class TestFitContract:
    def test_single_class_rejected(self, toy_data):
        X, y = toy_data
        with pytest.raises(SingleClassData):
            fit("lr", X, np.zeros(len(y), dtype=int))

    def test_unknown_algorithm(self, toy_data):
        X, y = toy_data
        with pytest.raises(detectors.UnknownAlgorithm):
            fit("xgboost", X, y)

    def test_lr_separates_two_points(self):
        X = np.array([[0.0] * 41, [1.0] * 41])
        y = np.array([LABEL_NORMAL, LABEL_ATTACK])
        model = fit("lr", X, y, seed=0)
        assert np.array_equal(model.predict(X), y)

    def test_dt_fits_consistent_data_exactly(self, toy_data):
        X, y = toy_data
        model = fit("dt", X, y, seed=0, hyperparams={"max_depth": 64, "min_leaf": 1})
        assert (model.predict(X) == y).mean() == 1.0

    @pytest.mark.parametrize("algorithm", ALGORITHMS)
    def test_all_algorithms_learn_separable_data(self, toy_data, algorithm):
        X, y = toy_data
        model = fit(algorithm, X, y, seed=3)
        assert (model.predict(X) == y).mean() >= 0.95

    @pytest.mark.parametrize("algorithm", ALGORITHMS)
    def test_deterministic_given_seed(self, toy_data, algorithm):
        X, y = toy_data
        probe = np.random.default_rng(5).random((40, 41))
        p1 = fit(algorithm, X, y, seed=11).predict(probe)
        p2 = fit(algorithm, X, y, seed=11).predict(probe)
        assert np.array_equal(p1, p2)


class TestPredictContract:
    @pytest.mark.parametrize("algorithm", ALGORITHMS)
    def test_batch_equals_concatenated_singles(self, toy_data, algorithm):
        X, y = toy_data
        model = fit(algorithm, X, y, seed=2)
        batch = np.random.default_rng(7).random((16, 41))
        whole = model.predict(batch)
        singles = np.concatenate([model.predict(batch[i : i + 1]) for i in range(16)])
        assert np.array_equal(whole, singles)

    def test_training_point_keeps_its_label(self, toy_data):
        X, y = toy_data
        model = fit("dt", X, y, seed=0)
        correct = model.predict(X) == y
        idx = int(np.argmax(correct))
        assert model.predict(X[idx : idx + 1])[0] == y[idx]

    def test_knn_self_neighbor(self, toy_data):
        X, y = toy_data
        model = fit("knn", X, y, seed=0, hyperparams={"k": 1})
        assert np.array_equal(model.predict(X), y)

    def test_schema_fingerprint_checked(self, toy_data):
        X, y = toy_data
        model = fit("nb", X, y, seed=0, schema_fingerprint="abc")
        assert np.array_equal(predict(model, X, "abc"), model.predict(X))
        with pytest.raises(SchemaMismatch):
            predict(model, X, "different")

    def test_wrong_width_rejected(self, toy_data):
        X, y = toy_data
        model = fit("lr", X, y, seed=0)
        with pytest.raises(SchemaMismatch):
            model.predict(np.zeros((3, 17)))


class TestAlgorithmOracles:
    def test_gnb_matches_log_domain_oracle(self):
        rng = np.random.default_rng(42)
        X = rng.random((30, 5))
        y = rng.integers(0, 2, size=30)
        while len(np.unique(y)) < 2:
            y = rng.integers(0, 2, size=30)
        model = detectors.GaussianNB({"var_floor": 1e-9}, seed=0)
        model.fit(X, y, rng)
        queries = rng.random((10, 5))
        got = model.log_posteriors(queries)

        floor = 1e-9
        for c in (0, 1):
            Xc = X[y == c]
            mu = Xc.mean(axis=0)
            var = np.maximum(Xc.var(axis=0), floor)
            prior = np.log(len(Xc) / len(X))
            for r, q in enumerate(queries):
                manual = prior + sum(
                    -0.5 * np.log(2 * np.pi * var[j]) - (q[j] - mu[j]) ** 2 / (2 * var[j])
                    for j in range(5)
                )
                assert abs(got[r, c] - manual) <= 1e-9

    @pytest.mark.parametrize("algorithm", ["svm", "lr"])
    def test_linear_decision_is_affine_score(self, toy_data, algorithm):
        X, y = toy_data
        model = fit(algorithm, X, y, seed=1)
        queries = np.random.default_rng(8).random((25, 41))
        scores = model.decision_scores(queries)
        manual = np.array([float(np.dot(model.w, q)) + model.b for q in queries])
        assert np.allclose(scores, manual, atol=1e-12, rtol=0)
        assert np.array_equal(
            model.predict(queries),
            np.where(manual >= 0.0, LABEL_ATTACK, LABEL_NORMAL),
        )

    def test_rf_vote_is_mode_of_trees(self, toy_data):
        X, y = toy_data
        model = fit("rf", X, y, seed=4, hyperparams={"n_trees": 7})
        queries = np.random.default_rng(9).random((20, 41))
        votes = model.tree_votes(queries)
        expected = np.where(
            votes.sum(axis=0) * 2 >= len(model.trees), LABEL_ATTACK, LABEL_NORMAL
        )
        assert np.array_equal(model.predict(queries), expected)

    def test_rf_even_tie_breaks_to_attack(self):
        # two constant-leaf trees voting 1 and 0 -> attack wins
        model = detectors.RandomForest(
            dict(detectors.DEFAULT_HYPERPARAMS["rf"]), seed=0
        )
        X = np.array([[0.0] * 4, [1.0] * 4, [0.0] * 4, [1.0] * 4])
        y = np.array([0, 1, 0, 1])
        model.fit(X, y, np.random.default_rng(0))
        model.trees = model.trees[:2]
        t0, t1 = model.trees
        t0.leaf_label = np.where(t0.leaf_label >= 0, LABEL_ATTACK, -1)
        t1.leaf_label = np.where(t1.leaf_label >= 0, LABEL_NORMAL, -1)
        assert model.predict(np.array([[0.5] * 4]))[0] == LABEL_ATTACK

    def test_knn_subsampling_capped_and_seeded(self, toy_data):
        X, y = toy_data
        model = fit("knn", X, y, seed=6, hyperparams={"max_reference": 50})
        assert len(model.ref_y) == 50
        model2 = fit("knn", X, y, seed=6, hyperparams={"max_reference": 50})
        assert np.array_equal(model.ref_X, model2.ref_X)


class TestSerialization:
    @pytest.mark.parametrize("algorithm", ALGORITHMS)
    def test_round_trip_predictions_identical(self, toy_data, algorithm, tmp_path):
        X, y = toy_data
        model = fit(algorithm, X, y, seed=13, schema_fingerprint="fp")
        path = tmp_path / f"{algorithm}.blob"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.algorithm == algorithm
        assert loaded.schema_fingerprint == "fp"
        queries = np.random.default_rng(14).random((30, 41))
        assert np.array_equal(loaded.predict(queries), model.predict(queries))

    def test_manifest_written(self, toy_data, tmp_path):
        X, y = toy_data
        model = fit("dt", X, y, seed=13)
        save_model(model, tmp_path / "dt.blob")
        manifest = (tmp_path / "dt.manifest.json").read_text()
        assert '"algorithm": "dt"' in manifest
        assert '"seed": 13' in manifest
