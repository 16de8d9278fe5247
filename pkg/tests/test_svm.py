"""Linear SVM tests, including equivalence against an independent oracle.

The oracle is projected gradient ascent on the box-constrained dual: it
shares nothing with the trainer's coordinate-descent path except the
objective definition, and it is run to (near) convergence, so agreement
of the primal objectives to 1e-3 relative checks the solver, not the
test.
"""

import numpy as np
import pytest

from readtask.errors import ParameterError, SingleClassError
from readtask.learners import (
    LinearSvmModel,
    decision_values,
    load_svm,
    predict,
    save_svm,
    svm_objective,
    train_svm,
)


def dual_projected_gradient_oracle(X, y, C, iterations=60_000):
    """Maximize sum(alpha) - 0.5 ||sum alpha_i y_i x'_i||^2 over [0, C]^n
    with x' the bias-augmented samples; full-gradient updates only."""
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    Q = (Xa @ Xa.T) * np.outer(y, y)
    step = 1.0 / max(np.linalg.eigvalsh(Q).max(), 1e-12)
    alpha = np.zeros(X.shape[0])
    for _ in range(iterations):
        grad = 1.0 - Q @ alpha
        alpha = np.clip(alpha + step * grad, 0.0, C)
    w_aug = Xa.T @ (alpha * y)
    return w_aug[:-1], float(w_aug[-1])


class TestBinary:
    def test_separable_clusters_reach_perfect_training_accuracy(self):
        rng = np.random.default_rng(0)
        a = rng.normal(-1.0, 0.2, size=(20, 2))
        b = rng.normal(+1.0, 0.2, size=(20, 2))
        X = np.vstack([a, b])
        labels = ["neg"] * 20 + ["pos"] * 20
        model = train_svm((X, labels), C=1.0, seed=0)
        assert predict(model, X) == labels

    def test_symmetric_points_put_boundary_at_zero(self):
        X = np.array([[-1.0], [1.0]])
        model = train_svm((X, ["a", "b"]), C=100.0, seed=0)
        boundary = -model.bias[0] / model.weights[0, 0]
        assert abs(boundary) <= 1e-3

    def test_sign_evaluation(self):
        model = LinearSvmModel(classes=["neg", "pos"],
                               weights=np.array([[1.0, 0.0]]),
                               bias=np.array([0.0]), C=1.0)
        assert predict(model, np.array([[2.0, 5.0]])) == ["pos"]
        assert predict(model, np.array([[-2.0, 5.0]])) == ["neg"]

    def test_tie_goes_to_smaller_label(self):
        model = LinearSvmModel(classes=["a", "b"],
                               weights=np.array([[1.0, 0.0]]),
                               bias=np.array([0.0]), C=1.0)
        assert predict(model, np.array([[0.0, 3.0]])) == ["a"]

    def test_decision_invariant_under_positive_rescaling(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(30, 3))
        labels = ["a" if x[0] + 0.3 * x[1] > 0 else "b" for x in X]
        model = train_svm((X, labels), C=1.0, seed=0)
        scaled = LinearSvmModel(classes=model.classes,
                                weights=7.3 * model.weights,
                                bias=7.3 * model.bias, C=model.C)
        probe = rng.normal(size=(50, 3))
        assert predict(model, probe) == predict(scaled, probe)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassError):
            train_svm((np.zeros((4, 2)), ["x"] * 4), C=1.0, seed=0)

    def test_dimension_mismatch_rejected(self):
        model = train_svm((np.array([[-1.0], [1.0]]), ["a", "b"]), seed=0)
        with pytest.raises(ParameterError):
            predict(model, np.zeros((2, 3)))

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(40, 4))
        labels = ["a" if v > 0 else "b" for v in X[:, 0]]
        m1 = train_svm((X, labels), C=1.0, seed=9)
        m2 = train_svm((X, labels), C=1.0, seed=9)
        np.testing.assert_array_equal(m1.weights, m2.weights)
        np.testing.assert_array_equal(m1.bias, m2.bias)


class TestOracleEquivalence:
    @pytest.mark.parametrize("problem_seed", range(10))
    def test_objective_within_1e3_of_oracle(self, problem_seed):
        rng = np.random.default_rng(1000 + problem_seed)
        n = int(rng.integers(10, 31))
        d = int(rng.integers(1, 6))
        X = rng.normal(size=(n, d))
        true_w = rng.normal(size=d)
        labels = np.where(X @ true_w + 0.3 * rng.normal(size=n) > 0, 1.0, -1.0)
        C = float(rng.choice([0.1, 1.0, 10.0]))

        names = ["neg" if v < 0 else "pos" for v in labels]
        model = train_svm((X, names), C=C, seed=0)
        ours = svm_objective(model.weights[0], model.bias[0], X, labels, C)

        w_star, b_star = dual_projected_gradient_oracle(X, labels, C)
        oracle = svm_objective(w_star, b_star, X, labels, C)

        scale = max(1.0, abs(oracle))
        assert ours <= oracle + 1e-3 * scale
        assert abs(ours - oracle) <= 1e-3 * scale


class TestMultiClass:
    def test_one_vs_rest_separable(self):
        rng = np.random.default_rng(3)
        centers = {"a": (-2, 0), "b": (2, 0), "c": (0, 3)}
        X, labels = [], []
        for name, (cx, cy) in centers.items():
            X.append(rng.normal((cx, cy), 0.2, size=(15, 2)))
            labels += [name] * 15
        X = np.vstack(X)
        model = train_svm((X, labels), C=10.0, seed=0)
        assert predict(model, X) == labels
        assert model.weights.shape == (3, 2)

    def test_multiclass_tie_breaks_to_smaller_label(self):
        model = LinearSvmModel(
            classes=["a", "b", "c"],
            weights=np.array([[1.0], [1.0], [0.5]]),
            bias=np.zeros(3), C=1.0)
        assert predict(model, np.array([[2.0]])) == ["a"]


def test_save_load_round_trip(tmp_path):
    X = np.array([[-1.0, 0.5], [1.0, -0.5], [-0.8, 0.1], [0.9, 0.0]])
    labels = ["a", "b", "a", "b"]
    model = train_svm((X, labels), C=2.0, seed=4)
    path = save_svm(model, tmp_path / "model.json")
    loaded = load_svm(path)
    np.testing.assert_array_equal(loaded.weights, model.weights)
    np.testing.assert_array_equal(loaded.bias, model.bias)
    assert loaded.classes == model.classes
    assert loaded.C == model.C
    probe = np.random.default_rng(0).normal(size=(5, 2))
    np.testing.assert_array_equal(decision_values(loaded, probe),
                                  decision_values(model, probe))
