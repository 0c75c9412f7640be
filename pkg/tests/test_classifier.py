import time

import numpy as np
import pytest
from scipy.special import expit

from pairtune.benchmarks import monotone
from pairtune.classifier import (DECISION_TREE, GBT, KINDS, LOGISTIC, ComparisonClassifier,
                                 GbtHyperParams, Logistic, fit_samples, load_model, save_model,
                                 train, winner_recall)
from pairtune.errors import DegenerateTrainingError, DimensionError, ModelFormatError
from pairtune.induction import PairSet, build_training_set, induce_pair


class Constant:
    def __init__(self, value):
        self.value = value

    def score(self, X):
        return np.full(X.shape[0], self.value)


class Oracle:
    """Scores 1 when the first setting of the pair has the larger first coordinate."""

    def score(self, X):
        z = np.round(X[:, 0] * 2.0**52).astype(np.uint64)
        from pairtune.induction import deinterleave
        a, b = deinterleave(z)
        return (a > b).astype(float)


def stub(model, d=1):
    return ComparisonClassifier("stub", model, d)


def irls(X, y, iters=50):
    # Newton's method oracle for the same penalized objective (intercept unpenalized)
    A = np.hstack([X, np.ones((X.shape[0], 1))])
    theta = np.zeros(A.shape[1])
    pen = np.eye(A.shape[1])
    pen[-1, -1] = 0.0
    for _ in range(iters):
        p = expit(A @ theta)
        grad = A.T @ (p - y) + pen @ theta
        hess = A.T @ (A * (p * (1 - p))[:, None]) + pen
        theta -= np.linalg.solve(hess, grad)
    return theta


@pytest.fixture(scope="module")
def monotone_model():
    rng = np.random.default_rng(3)
    X = rng.random((30, 2))
    return fit_samples(X, monotone(X)), X


class TestTrain:
    def test_one_dim_monotone_held_out(self):
        rng = np.random.default_rng(0)
        x = rng.random((50, 1))
        pairs = build_training_set(x, x[:, 0])
        order = rng.permutation(len(pairs))
        cut = int(0.8 * len(pairs))
        fit, held = order[:cut], order[cut:]
        clf = train(PairSet(pairs.inputs[fit], pairs.labels[fit]))
        acc = np.mean(clf.predict(pairs.inputs[held]) == pairs.labels[held])
        assert acc >= 0.95

    def test_identical_inputs_majority_rate(self):
        inputs = np.full((10, 2), 0.3)
        labels = np.array([1, 1, 1, 0, 1, 1, 0, 1, 1, 1])
        clf = train(PairSet(inputs, labels))
        assert clf.train_accuracy == pytest.approx(0.8)

    def test_memorizes_linear_objective(self):
        rng = np.random.default_rng(1)
        X = rng.random((10, 4))
        clf = fit_samples(X, X @ np.array([1.0, 2.0, -1.0, 0.5]))
        assert clf.train_accuracy == 1.0
        pairs = build_training_set(X, X @ np.array([1.0, 2.0, -1.0, 0.5]))
        assert len(pairs) == 90
        assert np.array_equal(clf.predict(pairs.inputs), pairs.labels)

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateTrainingError):
            train(PairSet(np.random.default_rng(0).random((6, 2)), np.zeros(6)))
        with pytest.raises(DegenerateTrainingError):
            fit_samples(np.random.default_rng(0).random((5, 2)), np.ones(5))

    @pytest.mark.parametrize("kind", KINDS)
    def test_deterministic(self, kind):
        rng = np.random.default_rng(2)
        X = rng.random((12, 3))
        a = fit_samples(X, monotone(X), kind, seed=4)
        b = fit_samples(X, monotone(X), kind, seed=4)
        probe = rng.random((500, 3))
        assert np.array_equal(a.scores(probe), b.scores(probe))

    def test_pivot_is_argmax_first_index(self):
        X = np.array([[0.1], [0.5], [0.9], [0.3]])
        clf = fit_samples(X, [1.0, 3.0, 3.0, 2.0])
        assert clf.pivot.index == 1
        assert clf.pivot.coords.tolist() == [0.5]

    def test_gbt_defaults(self):
        hyper = GbtHyperParams()
        assert (hyper.tree_count, hyper.max_depth, hyper.learning_rate,
                hyper.min_leaf_samples) == (100, 6, 0.3, 1)
        with pytest.raises(ValueError):
            GbtHyperParams(learning_rate=0.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            train(PairSet(np.eye(2), [0, 1]), kind="svm")


class TestLogistic:
    def test_matches_newton_oracle(self, rng):
        X = rng.random((80, 3))
        y = (X @ np.array([2.0, -1.0, 0.5]) + 0.3 * rng.normal(size=80) > 0.7).astype(float)
        model = Logistic.fit(X, y, GbtHyperParams())
        ref = irls(X, y)
        assert np.allclose(model.coef, ref[:3], atol=1e-4)
        assert model.intercept == pytest.approx(ref[3], abs=1e-4)


class TestPredict:
    def test_self_comparison_is_not_a_win(self, monotone_model):
        clf, X = monotone_model
        probe = np.random.default_rng(7).random((200, 2))
        assert np.all(clf.predict(induce_pair(probe, probe)) == 0)

    def test_batch_equals_single(self, monotone_model):
        clf, _ = monotone_model
        V = np.random.default_rng(8).random((10_000, 2))
        batch = clf.predict(V)
        single = np.array([clf.predict(v) for v in V])
        assert np.array_equal(batch, single)
        assert isinstance(clf.predict(V[0]), int)

    def test_small_and_large_batches_agree(self, monotone_model):
        clf, _ = monotone_model
        V = np.random.default_rng(10).random((3000, 2))
        chunks = np.concatenate([clf.scores(V[i:i + 300]) for i in range(0, 3000, 300)])
        assert np.array_equal(clf.scores(V), chunks)

    def test_memorized_pair(self, monotone_model):
        clf, X = monotone_model
        pairs = build_training_set(X, monotone(X))
        assert clf.predict(pairs.inputs[5]) == pairs.labels[5]

    def test_dimension_mismatch(self, monotone_model):
        clf, _ = monotone_model
        with pytest.raises(DimensionError):
            clf.predict(np.zeros(3))

    def test_throughput(self, monotone_model):
        clf, _ = monotone_model
        V = np.random.default_rng(9).random((100_000, 2))
        start = time.perf_counter()
        clf.predict(V)
        assert 100_000 / (time.perf_counter() - start) >= 1e4


class TestWinnerRecall:
    def test_perfect(self):
        winners = np.array([[0.7], [0.8], [0.95]])
        assert winner_recall(stub(Oracle()), winners, [0.6]) == 1.0

    def test_constant_zero(self):
        assert winner_recall(stub(Constant(0.0)), [[0.7], [0.9]], [0.6]) == 0.0

    def test_partial(self):
        # the oracle misses winners that only differ on the second axis
        clf = stub(Oracle(), d=2)
        assert winner_recall(clf, [[0.7, 0.5], [0.6, 0.9]], [0.6, 0.5]) == 0.5

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            winner_recall(stub(Constant(1.0)), np.empty((0, 1)), [0.5])


class TestPersistence:
    @pytest.mark.parametrize("kind", [GBT, DECISION_TREE, LOGISTIC])
    def test_round_trip(self, kind, tmp_path):
        rng = np.random.default_rng(5)
        X = rng.random((15, 3))
        clf = fit_samples(X, monotone(X), kind, seed=11)
        path = tmp_path / "model.json"
        save_model(clf, path)
        again = load_model(path)
        probe = rng.random((300, 3))
        assert np.array_equal(again.scores(probe), clf.scores(probe))
        assert again.pivot == clf.pivot
        assert (again.kind, again.seed, again.hyper, again.train_accuracy) == \
               (clf.kind, clf.seed, clf.hyper, clf.train_accuracy)

    def test_self_describing(self, tmp_path, monotone_model):
        path = tmp_path / "m.json"
        save_model(monotone_model[0], path)
        text = path.read_text()
        assert '"magic": "pairtune-comparison-model"' in text and '"version": 1' in text

    def test_rejects_foreign_files(self, tmp_path, monotone_model):
        path = tmp_path / "m.json"
        path.write_text('{"hello": 1}')
        with pytest.raises(ModelFormatError):
            load_model(path)
        path.write_text("not json")
        with pytest.raises(ModelFormatError):
            load_model(path)
        save_model(monotone_model[0], path)
        path.write_text(path.read_text().replace('"version": 1', '"version": 99'))
        with pytest.raises(ModelFormatError):
            load_model(path)
