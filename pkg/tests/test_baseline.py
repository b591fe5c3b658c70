import numpy as np
import pytest

from gradeforest.baseline import (
    LogisticModel,
    MultinomialModel,
    TrainOptions,
    _sigmoid,
    _softmax,
    fit_logistic,
    fit_multinomial,
    load_model,
    logistic_loss_grad,
    logit_predict_proba,
    multinomial_loss_grad,
    save_model,
    softmax_predict_proba,
)
from gradeforest.data import Dataset
from gradeforest.errors import ConfigError, DegenerateDataError, ModelTaskError

from oracles import finite_difference_gradient, logistic_nll


def binary_data(n=150, m=4, seed=0, margin=1.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, m))
    z = margin * (1.2 * X[:, 0] - 0.8 * X[:, 2]) + 0.3
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-z))).astype(int)
    y[:2] = [0, 1]
    return Dataset(X, y, tuple(f"f{i}" for i in range(m)), ("neg", "pos"))


def three_class_data(n=240, seed=1):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [3.0, 0.5], [0.5, 3.0]])
    y = rng.integers(0, 3, size=n)
    X = centers[y] + rng.normal(scale=0.7, size=(n, 2))
    return Dataset(X, y, ("u", "v"), ("a", "b", "c"))


class TestNumericPrimitives:
    def test_sigmoid_extremes(self):
        z = np.array([-1000.0, -30.0, 0.0, 30.0, 1000.0])
        p = _sigmoid(z)
        assert np.all(np.isfinite(p))
        assert p[0] == 0.0 or p[0] < 1e-300
        assert p[2] == 0.5
        assert p[4] == 1.0 or p[4] > 1.0 - 1e-12

    def test_softmax_rows_sum_to_one_under_huge_logits(self):
        logits = np.array([[1000.0, 999.0, 0.0], [-1000.0, -1000.0, -1000.0]])
        P = _softmax(logits)
        assert np.all(np.isfinite(P))
        assert np.allclose(P.sum(axis=1), 1.0)


class TestLossAndGradient:
    def test_logistic_loss_matches_plain_formula(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(30, 3))
        y = rng.integers(0, 2, size=30)
        beta = rng.normal(size=4)
        loss, _ = logistic_loss_grad(beta, X, y)
        assert loss == pytest.approx(logistic_nll(beta, X, y), rel=1e-12)

    def test_logistic_gradient_vs_finite_differences(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 3))
        y = rng.integers(0, 2, size=40)
        beta = rng.normal(size=4)
        _, grad = logistic_loss_grad(beta, X, y, l2=0.1)
        fd = finite_difference_gradient(
            lambda b: logistic_loss_grad(b, X, y, l2=0.1)[0], beta)
        assert np.max(np.abs(grad - fd)) < 1e-6

    def test_multinomial_gradient_vs_finite_differences(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(35, 2))
        y = rng.integers(0, 3, size=35)
        B = rng.normal(size=(2, 3))  # k-1=2 free rows, intercept + 2 features
        _, grad = multinomial_loss_grad(B, X, y, n_classes=3, l2=0.05)

        def flat_loss(flat):
            return multinomial_loss_grad(flat.reshape(2, 3), X, y, 3, l2=0.05)[0]

        fd = finite_difference_gradient(flat_loss, B.ravel()).reshape(2, 3)
        assert np.max(np.abs(grad - fd)) < 1e-6

    def test_two_class_multinomial_agrees_with_logistic(self):
        # with k=2 the free softmax row is exactly the logistic model
        rng = np.random.default_rng(7)
        X = rng.normal(size=(25, 2))
        y = rng.integers(0, 2, size=25)
        beta = rng.normal(size=3)
        # reference class is index 1, so logistic's "y=1" maps to class 0
        loss_m, grad_m = multinomial_loss_grad(beta[None, :], X, 1 - y, 2)
        loss_l, grad_l = logistic_loss_grad(beta, X, y)
        assert loss_m == pytest.approx(loss_l, rel=1e-12)
        assert np.allclose(grad_m[0], grad_l, atol=1e-12)


class TestFitLogistic:
    def test_recovers_separable_signal(self):
        data = binary_data(seed=2, margin=4.0)
        model = fit_logistic(data, np.arange(data.n_rows))
        acc = float(np.mean(model.predict(data.X) == data.y))
        assert acc > 0.9
        assert model.feature_names == data.feature_names
        assert model.class_names == data.class_names

    def test_coefficients_are_in_original_units(self):
        # training standardizes internally; returned coefficients must
        # reproduce the same probabilities on raw inputs
        data = binary_data(seed=3)
        scaled = Dataset(data.X * np.array([10.0, 1.0, 0.1, 1.0]), data.y,
                         data.feature_names, data.class_names)
        model = fit_logistic(scaled, np.arange(scaled.n_rows))
        p = model.predict_proba(scaled.X)
        assert np.all((p > 0) & (p < 1))
        # refitting on the same rows is deterministic
        again = fit_logistic(scaled, np.arange(scaled.n_rows))
        assert np.array_equal(again.beta, model.beta)

    def test_probability_threshold_is_half(self):
        beta = np.array([0.0, 1.0])
        model = LogisticModel(beta=beta, feature_names=("f0",),
                              class_names=("n", "p"))
        X = np.array([[-2.0], [-1e-9], [1e-9], [3.0]])
        assert model.predict(X).tolist() == [0, 0, 1, 1]
        assert logit_predict_proba(model, [0.0]) == 0.5

    def test_requires_two_classes(self):
        data = three_class_data()
        with pytest.raises(ModelTaskError, match="multinomial"):
            fit_logistic(data, np.arange(data.n_rows))

    def test_single_class_rows_degenerate(self):
        data = binary_data(seed=1)
        rows = np.flatnonzero(data.y == 0)
        with pytest.raises(DegenerateDataError):
            fit_logistic(data, rows)

    def test_zero_iterations_returns_the_zero_model(self):
        data = binary_data(seed=6)
        model = fit_logistic(data, np.arange(data.n_rows),
                             TrainOptions(max_iterations=0))
        assert np.array_equal(model.beta, np.zeros(data.n_features + 1))
        assert np.all(model.predict_proba(data.X) == 0.5)

    def test_l2_shrinks_coefficients(self):
        data = binary_data(seed=8, margin=3.0)
        free = fit_logistic(data, np.arange(data.n_rows))
        ridged = fit_logistic(data, np.arange(data.n_rows),
                              TrainOptions(l2_penalty=5.0))
        assert np.linalg.norm(ridged.beta[1:]) < np.linalg.norm(free.beta[1:])


class TestFitMultinomial:
    def test_separates_three_blobs(self):
        data = three_class_data()
        model = fit_multinomial(data, np.arange(data.n_rows))
        acc = float(np.mean(model.predict(data.X) == data.y))
        assert acc > 0.85
        assert np.all(model.beta[-1] == 0.0)  # reference class row

    def test_probabilities_normalized(self):
        data = three_class_data(seed=5)
        model = fit_multinomial(data, np.arange(data.n_rows))
        P = model.predict_proba(data.X)
        assert P.shape == (data.n_rows, 3)
        assert np.allclose(P.sum(axis=1), 1.0)
        single = softmax_predict_proba(model, data.X[0])
        assert np.allclose(single, P[0])

    def test_works_on_two_classes_too(self):
        data = binary_data(seed=9)
        model = fit_multinomial(data, np.arange(data.n_rows))
        acc = float(np.mean(model.predict(data.X) == data.y))
        assert acc > 0.6

    def test_single_class_rows_degenerate(self):
        data = three_class_data()
        rows = np.flatnonzero(data.y == 2)
        with pytest.raises(DegenerateDataError):
            fit_multinomial(data, rows)


class TestOptionsValidation:
    def test_bad_options(self):
        with pytest.raises(ConfigError):
            TrainOptions(learning_rate=0.0)
        with pytest.raises(ConfigError):
            TrainOptions(max_iterations=-1)
        with pytest.raises(ConfigError):
            TrainOptions(l2_penalty=-0.5)


class TestPersistence:
    def test_logistic_round_trip(self, tmp_path):
        data = binary_data(seed=10)
        model = fit_logistic(data, np.arange(data.n_rows))
        path = tmp_path / "m.tsv"
        save_model(model, path)
        back = load_model(path)
        assert isinstance(back, LogisticModel)
        assert np.array_equal(back.beta, model.beta)
        assert back.feature_names == model.feature_names
        assert back.class_names == model.class_names

    def test_multinomial_round_trip(self, tmp_path):
        data = three_class_data(seed=11)
        model = fit_multinomial(data, np.arange(data.n_rows))
        path = tmp_path / "m.tsv"
        save_model(model, path)
        back = load_model(path)
        assert isinstance(back, MultinomialModel)
        assert np.array_equal(back.beta, model.beta)
        assert back.class_names == model.class_names

    def test_save_twice_identical_bytes(self, tmp_path):
        data = binary_data(seed=12)
        model = fit_logistic(data, np.arange(data.n_rows))
        a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
        save_model(model, a)
        save_model(model, b)
        assert a.read_bytes() == b.read_bytes()
