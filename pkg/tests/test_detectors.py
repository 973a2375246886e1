import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_force_path_length, c_normalizer
from txnforge.detectors import (
    DecisionTree,
    GaussianMixture,
    IsolationForest,
    IsolationTree,
    average_path_length,
    dtree_fit,
    gmm_fit_predict,
    iforest_fit_score,
    n_flagged,
)
from txnforge.errors import DataError, ParameterError
from txnforge.features import event_matrix, select_columns
from txnforge.metrics import ConfusionMatrix, mcc
from txnforge.rng import make_rng

# --- decision tree ---------------------------------------------------------


def test_tree_separable_midpoint():
    t = dtree_fit([[0], [1], [10], [11]], [0, 0, 1, 1], max_depth=1)
    assert t.thresholds() == [5.5]
    assert (t.predict([[0], [1], [10], [11]]) == [0, 0, 1, 1]).all()


def test_tree_single_class_is_leaf():
    t = dtree_fit([[1], [2], [3]], [1, 1, 1], max_depth=3)
    assert t.thresholds() == [] and t.predict([[5]]).tolist() == [1]


def test_tree_tie_breaks_to_lowest_feature():
    X = [[0, 0], [1, 1], [10, 10], [11, 11]]
    t = dtree_fit(X, [0, 0, 1, 1], max_depth=1)
    assert t.root.feature == 0


def test_tree_tie_breaks_to_lowest_threshold():
    # splitting at 0.5 or 2.5 both isolate a single minority row
    t = dtree_fit([[0], [1], [2], [3]], [1, 0, 0, 1], max_depth=1)
    assert t.thresholds() == [0.5]


def test_tree_validation():
    with pytest.raises(ParameterError):
        DecisionTree(max_depth=0)
    with pytest.raises(DataError):
        dtree_fit([[1]], [0, 1])


def test_tree_leaf_bound_and_midpoints():
    rng = np.random.default_rng(3)
    X = rng.integers(0, 20, size=(200, 2)).astype(float)
    y = (X[:, 0] + rng.normal(0, 3, 200) > 10).astype(int)
    for depth in (1, 2, 3):
        t = dtree_fit(X, y, depth)
        assert t.n_leaves() <= 2 ** depth
        for node in t.internal_nodes():
            assert node.threshold * 2 == math.floor(node.threshold * 2)  # integer data: halves only


@given(
    arrays(float, st.tuples(st.integers(1, 30), st.integers(1, 3)), elements=st.integers(0, 9).map(float)),
    st.data(),
)
@settings(max_examples=50, deadline=None)
def test_tree_beats_majority(X, data):
    y = np.array(data.draw(st.lists(st.integers(0, 1), min_size=len(X), max_size=len(X))))
    t = dtree_fit(X, y, data.draw(st.integers(1, 3)))
    acc = (t.predict(X) == y).mean()
    assert acc >= max(y.mean(), 1 - y.mean()) - 1e-12


def test_tree_simple_model(simple_run):
    fm = event_matrix(simple_run)
    t = dtree_fit(fm.X, fm.y, 1)
    assert 68 <= t.thresholds()[0] <= 78


# --- gaussian mixture ------------------------------------------------------


def two_clusters(seed=0):
    rng = np.random.default_rng(seed)
    return np.concatenate([rng.normal(0, 1, 100), rng.normal(100, 1, 100)])[:, None]


def test_gmm_recovers_means():
    _, model = gmm_fit_predict(two_clusters(), 2, seed=1)
    assert sorted(model.means.ravel().round(6)) == pytest.approx([0, 100], abs=0.5)
    assert model.weights.sum() == pytest.approx(1.0, abs=1e-9)


def test_gmm_one_component_flags_nothing():
    pred, model = gmm_fit_predict(two_clusters(), 1, seed=1)
    assert pred.sum() == 0
    assert model.suspicious_components() == []


def test_gmm_smaller_weight_is_suspicious():
    rng = np.random.default_rng(2)
    X = np.concatenate([rng.normal(0, 1, 190), rng.normal(50, 1, 10)])[:, None]
    pred, _ = gmm_fit_predict(X, 2, seed=0)
    assert pred[:190].sum() == 0 and pred[190:].sum() == 10


def test_gmm_override_mapping():
    X = two_clusters()
    model = GaussianMixture(n_components=2, seed=0, suspicious_component=0).fit(X)
    assert set(model.predict(X)[model.predict_components(X) == 0]) == {1}


def test_gmm_identical_points():
    X = np.full((30, 2), 7.0)
    pred, model = gmm_fit_predict(X, 2, seed=0)
    assert np.isfinite(model.log_likelihoods).all()
    assert (model.variances >= 1e-6).all()
    np.testing.assert_allclose(model.means, 7.0)


def test_gmm_too_few_rows():
    with pytest.raises(DataError):
        gmm_fit_predict(np.zeros((1, 1)), 2)


def test_gmm_deterministic():
    X = np.random.default_rng(5).normal(size=(80, 3))
    a, ma = gmm_fit_predict(X, 3, seed=9)
    b, mb = gmm_fit_predict(X, 3, seed=9)
    assert (a == b).all() and np.array_equal(ma.means, mb.means)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
@settings(max_examples=25, deadline=None)
def test_gmm_responsibilities_normalize(seed, k):
    X = np.random.default_rng(seed).normal(size=(40, 2))
    model = GaussianMixture(n_components=k, seed=seed, n_init=2).fit(X)
    np.testing.assert_allclose(model.predict_proba(X).sum(axis=1), 1.0, atol=1e-9)


# --- isolation forest ------------------------------------------------------


def test_c_normalizer_values():
    assert average_path_length(1) == 0.0
    assert average_path_length(2) == 1.0
    assert average_path_length(256) == pytest.approx(c_normalizer(256))
    # 2 * H(255) - 2*255/256 with the exact harmonic number, within the log approximation error
    h = sum(1.0 / i for i in range(1, 256))
    assert average_path_length(256) == pytest.approx(2 * h - 2 * 255 / 256, abs=1e-2)


def test_flag_count_rounding():
    assert n_flagged(0.1, 1010) == 101
    assert n_flagged(0.01, 1010) == 11
    assert n_flagged(0.1, 1000) == 100


def test_iforest_exact_flag_count():
    X = np.random.default_rng(0).normal(size=(1010, 2))
    _, flags, _ = iforest_fit_score(X, IsolationForest(contamination=0.1, seed=1))
    assert flags.sum() == 101


def test_iforest_constant_matrix():
    X = np.ones((20, 3))
    scores, flags, _ = iforest_fit_score(X, IsolationForest(contamination=0.1, seed=0))
    assert np.all(scores == scores[0]) and scores[0] == pytest.approx(0.5)
    assert flags.tolist() == [1, 1] + [0] * 18


def test_iforest_far_point_max_score():
    rng = np.random.default_rng(4)
    X = np.concatenate([rng.normal(0, 1, 100), [1000.0]])[:, None]
    scores, flags, _ = iforest_fit_score(X, IsolationForest(contamination=0.01, seed=3))
    assert int(np.argmax(scores)) == 100 and flags[100] == 1


def test_far_point_shortest_path_exhaustive_oracle():
    rng = np.random.default_rng(8)
    X = np.concatenate([rng.normal(0, 1, 7), [1000.0]])[:, None]
    forest = IsolationForest(n_trees=50, contamination=0.125, seed=11, max_depth=64).fit(X)
    oracle = np.mean(
        [[brute_force_path_length(t, X, x) for x in X] for t in forest.trees], axis=0
    )
    np.testing.assert_array_equal(forest.mean_path_length(X), oracle)
    assert int(np.argmin(oracle)) == 7
    assert int(np.argmax(forest.score(X))) == 7


@given(st.integers(2, 10), st.integers(1, 3), st.integers(0, 2**32 - 1), st.booleans())
@settings(max_examples=60, deadline=None)
def test_tree_path_lengths_match_oracle(n, d, seed, limited):
    rng = make_rng(seed)
    X = rng.integers(0, 6, size=(n, d)).astype(float)
    depth = math.ceil(math.log2(n)) if limited else 64
    tree = IsolationTree.grow(X, make_rng(seed + 1), depth)
    queries = np.concatenate([X, rng.uniform(-1, 7, size=(3, d))])
    got = tree.path_lengths(queries)
    want = [brute_force_path_length(tree, X, q) for q in queries]
    assert got.tolist() == want


def test_iforest_validation():
    with pytest.raises(ParameterError):
        IsolationForest(contamination=0.0)
    with pytest.raises(ParameterError):
        IsolationForest(contamination=0.6)
    with pytest.raises(DataError):
        IsolationForest().fit(np.zeros((1, 1)))


@given(
    arrays(float, st.tuples(st.integers(2, 60), st.integers(1, 3)),
           elements=st.floats(-1e3, 1e3, allow_nan=False)),
    st.sampled_from([0.01, 0.1, 0.25, 0.5]),
)
@settings(max_examples=40, deadline=None)
def test_iforest_flag_count_property(X, c):
    scores, flags, _ = iforest_fit_score(X, IsolationForest(n_trees=10, contamination=c, seed=0))
    assert flags.sum() == math.ceil(round(c * len(X), 9))
    assert ((scores > 0) & (scores < 1)).all()


def test_iforest_deterministic():
    X = np.random.default_rng(1).normal(size=(300, 4))
    a = iforest_fit_score(X, IsolationForest(seed=5))[0]
    b = iforest_fit_score(X, IsolationForest(seed=5))[0]
    assert np.array_equal(a, b)


def test_iforest_graph_all_features(graph_features):
    fm = select_columns(graph_features, "all")
    _, flags, _ = iforest_fit_score(fm.X, IsolationForest(contamination=0.01, seed=42))
    assert mcc(ConfusionMatrix.from_labels(fm.y, flags)) > 0.5
