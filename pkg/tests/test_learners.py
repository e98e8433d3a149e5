import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icardo.data import ScalerParams, fit_scaler, from_arrays, minmax_scale
from icardo.errors import ShapeError, TrainingError
from icardo.featureset import FeatureSet, SelectorKind
from icardo.learners import (
    CLASSIFIER_ORDER,
    ClassifierKind,
    TrainedModel,
    default_params,
    gradient_oracle_check,
    params_from_dict,
    predict,
    predict_raw,
    train,
)
from icardo.learners import bayes, boosting, linear
from icardo.learners.hyperparams import AdaBoostParams, GradBoostParams, KNNParams, SVMParams
from icardo.learners.svm import kkt_violation
from oracles import gaussian_nb_oracle, svm_dual_oracle

XOR_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_Y = np.array([0, 0, 1, 1])
FAST = {
    ClassifierKind.MLP: {"epochs": 40},
    ClassifierKind.GRADBOOST: {"n_rounds": 30},
    ClassifierKind.LOGREG: {"epochs": 300},
}


def fast_hp(kind):
    return params_from_dict(kind, FAST.get(kind, {}))


def blobs(n=60, p=4, seed=0):
    r = np.random.default_rng(seed)
    y = np.array([0, 1] * (n // 2))
    x = r.normal(size=(n, p)) * 0.4 + y[:, None] * 1.0
    return (x - x.min(0)) / (x.max(0) - x.min(0)), y


def test_seven_kinds():
    assert len(ClassifierKind) == 7 and len(CLASSIFIER_ORDER) == 7


def test_documented_defaults():
    assert default_params("logreg") == params_from_dict("logreg", {"lr": 0.1, "l2": 1e-3, "epochs": 2000})
    svm = default_params("svm")
    assert (svm.kernel, svm.C, svm.gamma, svm.tol) == ("rbf", 1.0, None, 1e-3)
    assert default_params("adaboost").n_stumps == 100
    gb = default_params("gradboost")
    assert (gb.n_rounds, gb.depth, gb.shrinkage, gb.min_leaf) == (200, 3, 0.1, 2)
    assert (default_params("knn").k, default_params("knn").metric) == (5, "euclidean")
    assert default_params("naive_bayes").var_floor == 1e-9
    mlp = default_params("mlp")
    assert (mlp.hidden, mlp.lr, mlp.epochs, mlp.activation) == (16, 0.05, 500, "logistic")


def test_hyperparam_validation():
    with pytest.raises(ValueError):
        params_from_dict("svm", {"C": -1.0})
    with pytest.raises(ValueError):
        params_from_dict("knn", {"neighbours": 3})
    with pytest.raises(ValueError):
        params_from_dict("svm", {"kernel": "sigmoid"})


@pytest.mark.parametrize("kind", list(ClassifierKind))
def test_every_kind_learns_separable_blobs(kind):
    x, y = blobs()
    model = train(kind, x, y, fast_hp(kind), seed=3)
    labels, scores = predict(model, x)
    assert set(np.unique(labels)) <= {0, 1}
    assert np.mean(labels == y) >= 0.9
    assert model.hyperparams == fast_hp(kind)


@pytest.mark.parametrize("kind", list(ClassifierKind))
def test_training_is_byte_deterministic(kind):
    x, y = blobs(seed=1)
    a = train(kind, x, y, fast_hp(kind), seed=11).to_json()
    b = train(kind, x, y, fast_hp(kind), seed=11).to_json()
    assert a == b


@pytest.mark.parametrize("kind", list(ClassifierKind))
def test_model_json_round_trip(kind):
    x, y = blobs(seed=2)
    model = train(kind, x, y, fast_hp(kind), seed=5)
    back = TrainedModel.from_json(model.to_json())
    assert back.to_json() == model.to_json()
    assert np.array_equal(predict(back, x)[1], predict(model, x)[1])
    fields = json.loads(model.to_json())
    assert {"kind", "hyperparams", "params", "feature_mask", "scaler", "encodings", "seed",
            "convergence_flag"} <= set(fields)


@pytest.mark.parametrize("kind", list(ClassifierKind))
def test_scores_monotone_with_labels(kind):
    x, y = blobs(seed=4)
    model = train(kind, x, y, fast_hp(kind), seed=1)
    labels, scores = predict(model, x)
    if (labels == 1).any() and (labels == 0).any():
        assert scores[labels == 1].min() >= scores[labels == 0].max()


def test_single_class_and_shape_errors():
    x, y = blobs()
    with pytest.raises(TrainingError):
        train("svm", x, np.ones(len(y), dtype=int))
    model = train("knn", x, y)
    with pytest.raises(ShapeError):
        predict(model, x[:, :2])


# -- SVM ---------------------------------------------------------------------

def test_svm_two_points_both_support_vectors():
    model = train("svm", np.array([[0.0, 0.0], [1.0, 1.0]]), np.array([0, 1]), SVMParams(kernel="linear"))
    labels, _ = predict(model, np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert labels.tolist() == [0, 1]
    assert sorted(model.params["support_indices"].tolist()) == [0, 1]


def test_svm_xor_matches_exact_dual():
    ys = np.where(XOR_Y == 1, 1.0, -1.0)
    alpha_ref, rho_ref, obj_ref = svm_dual_oracle(XOR_X.tolist(), ys, 1.0, 10.0)
    hp = SVMParams(gamma=1.0, C=10.0)
    model = train("svm", XOR_X, XOR_Y, hp)
    labels, _ = predict(model, XOR_X)
    assert labels.tolist() == XOR_Y.tolist()
    assert kkt_violation(XOR_X, XOR_Y, model.params, hp) < 1e-3
    alpha = np.zeros(4)
    alpha[model.params["support_indices"]] = model.params["dual"]
    assert np.allclose(alpha, alpha_ref, atol=5e-3)
    # at a tight tolerance SMO lands on the enumerated optimum
    tight = train("svm", XOR_X, XOR_Y, replace(hp, tol=1e-9))
    alpha_t = np.zeros(4)
    alpha_t[tight.params["support_indices"]] = tight.params["dual"]
    assert np.allclose(alpha_t, alpha_ref, atol=1e-6)
    assert tight.params["rho"] == pytest.approx(rho_ref, abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["rbf", "linear", "poly"]), st.sampled_from([0.1, 1.0, 10.0]))
def test_svm_dual_feasibility_and_kkt(seed, kernel, C):
    r = np.random.default_rng(seed)
    x = r.random((30, 3))
    y = np.array([0, 1] * 15)
    hp = SVMParams(kernel=kernel, C=C)
    model = train("svm", x, y, hp)
    dual = model.params["dual"]
    labels_pm = model.params["support_labels"]
    assert np.all(dual >= 0) and np.all(dual <= C + 1e-12)
    assert abs(float(dual @ labels_pm)) < 1e-6
    if model.converged:
        assert kkt_violation(x, y, model.params, hp) < hp.tol + 1e-9


# -- boosting ----------------------------------------------------------------

def test_adaboost_stumps_valid():
    x, y = blobs(seed=6)
    model = train("adaboost", x, y, AdaBoostParams(n_stumps=30))
    ys = np.where(y == 1, 1.0, -1.0)
    w = np.full(len(y), 1.0 / len(y))
    for s in model.params["stumps"]:
        assert np.isfinite(s["alpha"])
        miss = boosting.stump_predict(x, s["feature"], s["threshold"], s["polarity"]) != ys
        assert w[miss].sum() < 0.5
        w = w * np.exp(s["alpha"] * miss)
        w /= w.sum()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(8, 50), st.integers(1, 4))
def test_adaboost_training_error_bound_non_increasing(seed, n, p):
    r = np.random.default_rng(seed)
    x = r.random((n, p))
    y = np.array([0, 1] + list(r.integers(0, 2, n - 2)))
    params, _ = boosting.fit_adaboost(x, y, AdaBoostParams(n_stumps=25))
    ys = np.where(y == 1, 1.0, -1.0)
    bounds, errors = [1.0], []
    for t in range(1, len(params["stumps"]) + 1):
        f = boosting.adaboost_decision(params, x, t)
        bounds.append(float(np.mean(np.exp(-ys * f / 2.0))))
        errors.append(float(np.mean((f > 0).astype(int) != y)))
    for a, b in zip(bounds, bounds[1:]):
        assert b <= a * (1 + 1e-12)
    for e, bound in zip(errors, bounds[1:]):
        assert e <= bound + 1e-12


def test_adaboost_zero_stumps_is_majority():
    x = np.ones((5, 2))
    y = np.array([1, 1, 1, 0, 0])
    model = train("adaboost", x, y)
    assert model.params["stumps"] == []
    assert predict(model, np.zeros((3, 2)))[0].tolist() == [1, 1, 1]


@pytest.mark.parametrize("newton", [False, True])
def test_gradboost_log_loss_decreases_first_rounds(newton):
    x, y = blobs(seed=7)
    hp = GradBoostParams(n_rounds=10, newton=newton)
    params, _ = boosting.fit_gradboost(x, y, hp)
    losses = []
    for t in range(0, 11):
        f = boosting.gradboost_margin(params, x, hp, n_rounds=t)
        losses.append(float(np.mean(np.logaddexp(0.0, f) - y * f)))
    assert all(b < a for a, b in zip(losses, losses[1:]))


# -- KNN / NB / linear -------------------------------------------------------

def test_knn_k1_recovers_training_labels():
    x, y = blobs(seed=8)
    model = train("knn", x, y, KNNParams(k=1))
    assert np.array_equal(predict(model, x)[0], y)


def test_knn_split_vote_goes_to_class_zero():
    x = np.array([[0.0], [1.0]])
    model = train("knn", x, np.array([0, 1]), KNNParams(k=2))
    assert predict(model, np.array([[0.5]]))[0].tolist() == [0]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["euclidean", "manhattan"]))
def test_knn_invariant_to_row_order(seed, metric):
    r = np.random.default_rng(seed)
    x = r.random((25, 3))
    y = np.array([0, 1] * 12 + [1])
    query = r.random((10, 3))
    perm = r.permutation(25)
    hp = KNNParams(k=3, metric=metric)
    a = predict(train("knn", x, y, hp), query)
    b = predict(train("knn", x[perm], y[perm], hp), query)
    assert np.array_equal(a[0], b[0]) and np.allclose(a[1], b[1])


def test_gaussian_nb_separated_clusters():
    r = np.random.default_rng(0)
    x = np.concatenate([r.normal(0, 1, 50), r.normal(10, 1, 50)])[:, None]
    y = np.array([0] * 50 + [1] * 50)
    model = train("naive_bayes", x, y)
    labels, _ = predict(model, x)
    assert np.mean(labels == y) == 1.0
    grid = np.linspace(-3, 13, 161)[:, None]
    assert predict(model, grid)[0].tolist() == gaussian_nb_oracle(x.tolist(), y.tolist(), grid.tolist())


def test_gaussian_nb_matches_oracle_multifeature():
    x, y = blobs(seed=9, p=3)
    q = np.random.default_rng(1).random((40, 3))
    model = train("naive_bayes", x, y)
    assert predict(model, q)[0].tolist() == gaussian_nb_oracle(x.tolist(), y.tolist(), q.tolist())


@given(st.floats(0.01, 100.0))
def test_nb_argmax_invariant_to_prior_scaling(c):
    x, y = blobs(seed=10)
    params, _ = bayes.fit(x, y, default_params("naive_bayes"))
    scaled = dict(params, priors=params["priors"] * c)
    a = bayes.labels_from_joint(bayes.joint_log_likelihood(params, x))
    b = bayes.labels_from_joint(bayes.joint_log_likelihood(scaled, x))
    assert np.array_equal(a, b)


def test_logreg_zero_weights_tie_to_class_zero():
    params = {"weights": np.zeros(3), "bias": 0.0}
    scores = linear.decision(params, np.random.default_rng(0).random((4, 3)))
    assert np.all(scores == 0.5)
    assert linear.labels(params, scores).tolist() == [0, 0, 0, 0]


# -- gradients ---------------------------------------------------------------

TOY_X = np.array([[0.1, 0.9], [0.8, 0.2], [0.4, 0.4], [0.9, 0.7]])
TOY_Y = np.array([0, 1, 0, 1])


def test_logreg_gradient_matches_finite_differences():
    assert gradient_oracle_check("logreg", TOY_X, TOY_Y) < 1e-4


def test_mlp_gradient_matches_finite_differences():
    assert gradient_oracle_check("mlp", TOY_X, TOY_Y, hidden=3) < 1e-3


def test_logreg_symmetric_bias_gradient_zero():
    x = np.array([[0.2], [0.8], [0.2], [0.8]])
    y = np.array([0, 0, 1, 1])
    _, grad = linear.loss_and_grad(np.zeros(2), x, y, 1e-3)
    assert grad[-1] == 0.0


def test_gradient_check_rejects_large_data():
    with pytest.raises(ValueError):
        gradient_oracle_check("logreg", np.zeros((21, 2)), np.zeros(21))


# -- raw-row prediction ------------------------------------------------------

@pytest.mark.parametrize("kind", [ClassifierKind.SVM, ClassifierKind.LOGREG, ClassifierKind.KNN])
def test_predict_raw_equals_prescaled(kind):
    r = np.random.default_rng(12)
    raw = r.normal(50, 10, size=(40, 5))
    y = (raw[:, 1] + raw[:, 3] > 100).astype(int)
    ds = from_arrays(raw, y)
    scaled, scaler = minmax_scale(ds)
    fs = FeatureSet(SelectorKind.CHI2, 2, (3, 1), "1C")
    x = np.asarray(scaled.x)[:, [3, 1]]
    model = train(kind, x, y, fast_hp(kind), feature_mask=fs, scaler=scaler)
    a = predict(model, x)
    b = predict_raw(model, raw)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_predict_raw_requires_scaler():
    x, y = blobs()
    with pytest.raises(ValueError):
        predict_raw(train("knn", x, y), x)


def test_mask_size_must_match():
    x, y = blobs()
    fs = FeatureSet(SelectorKind.CHI2, 2, (0, 1), "1C")
    with pytest.raises(ShapeError):
        train("knn", x, y, feature_mask=fs)


def test_scaler_round_trips_inside_model():
    x, y = blobs()
    scaler = fit_scaler(from_arrays(x, y))
    model = train("knn", x, y, scaler=scaler)
    assert TrainedModel.from_json(model.to_json()).scaler == scaler
    assert isinstance(scaler, ScalerParams)
