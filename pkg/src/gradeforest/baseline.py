"""Logistic and multinomial-logistic benchmark classifiers.

Both models are trained by full-batch gradient descent on the average
negative log-likelihood, with step halving whenever a step would increase
the loss, so the accepted loss sequence is non-increasing. Predictors are
z-scored internally for optimization (credits and grades live on very
different scales); the returned coefficients are mapped back to the
original units.

The multinomial model pins the last class's coefficients at zero
(reference-class softmax), so with k classes only k-1 coefficient rows are
free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigError, DegenerateDataError, ModelTaskError, NumericError


@dataclass(frozen=True)
class TrainOptions:
    learning_rate: float = 0.5
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    l2_penalty: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be >= 0")
        if self.gradient_tolerance <= 0:
            raise ConfigError("gradient_tolerance must be positive")
        if self.l2_penalty < 0:
            raise ConfigError("l2_penalty must be >= 0")


@dataclass(frozen=True)
class LogisticModel:
    """Binary model: P(y=1 | x) = sigmoid(beta[0] + x . beta[1:])."""

    beta: np.ndarray  # length m+1, intercept first
    feature_names: tuple[str, ...] = ()
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=np.float64)
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)
        if not np.all(np.isfinite(b)):
            raise ConfigError("coefficients must be finite")

    @property
    def n_features(self) -> int:
        return len(self.beta) - 1

    def predict_proba(self, X) -> np.ndarray:
        X = _check_matrix(X, self.n_features)
        return _sigmoid(self.beta[0] + X @ self.beta[1:])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)


@dataclass(frozen=True)
class MultinomialModel:
    """k-class softmax model with the last class as the zero reference row."""

    beta: np.ndarray  # shape (k, m+1), last row all zero
    feature_names: tuple[str, ...] = ()
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=np.float64)
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)
        if b.ndim != 2 or b.shape[0] < 2:
            raise ConfigError("expected a (k, m+1) coefficient matrix with k >= 2")
        if not np.all(np.isfinite(b)):
            raise ConfigError("coefficients must be finite")
        if np.any(b[-1] != 0.0):
            raise ConfigError("the reference class row must be all zero")

    @property
    def n_classes(self) -> int:
        return self.beta.shape[0]

    @property
    def n_features(self) -> int:
        return self.beta.shape[1] - 1

    def predict_proba(self, X) -> np.ndarray:
        X = _check_matrix(X, self.n_features)
        logits = self.beta[:, 0][None, :] + X @ self.beta[:, 1:].T
        return _softmax(logits)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


def _check_matrix(X, m: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != m:
        raise ValueError(f"expected feature width {m}, got {X.shape[1]}")
    return X


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # overflow-safe in both tails
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=1, keepdims=True)


def logit_predict_proba(model: LogisticModel, x) -> float:
    """P(y=1) for a single feature vector."""
    return float(model.predict_proba(np.asarray(x, dtype=np.float64)[None, :])[0])


def softmax_predict_proba(model: MultinomialModel, x) -> np.ndarray:
    """Class probability vector for a single feature vector; sums to 1."""
    return model.predict_proba(np.asarray(x, dtype=np.float64)[None, :])[0]


# ---------------------------------------------------------------------------
# Loss and gradient (exposed for direct checking against finite differences)
# ---------------------------------------------------------------------------

def logistic_loss_grad(beta, X, y, l2: float = 0.0):
    """Average negative log-likelihood and its gradient.

    ``beta`` has the intercept first; the L2 penalty (l2/2 * ||beta[1:]||^2)
    never touches the intercept.
    """
    beta = np.asarray(beta, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    z = beta[0] + X @ beta[1:]
    # log(1 + e^z) - y z, computed without overflow
    loss = float(np.mean(np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z))) - y * z))
    p = _sigmoid(z)
    resid = p - y
    grad = np.empty_like(beta)
    grad[0] = resid.mean()
    grad[1:] = X.T @ resid / n
    if l2 > 0.0:
        loss += 0.5 * l2 * float(beta[1:] @ beta[1:])
        grad[1:] += l2 * beta[1:]
    return loss, grad


def multinomial_loss_grad(beta_free, X, y, n_classes: int, l2: float = 0.0):
    """Average negative log-likelihood of the reference-class softmax model.

    ``beta_free`` holds the k-1 free coefficient rows (intercept first in
    each row); the reference class k-1 is implicitly all zero.
    """
    B = np.asarray(beta_free, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    logits = np.zeros((n, n_classes), dtype=np.float64)
    logits[:, :-1] = B[:, 0][None, :] + X @ B[:, 1:].T
    zmax = logits.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(logits - zmax).sum(axis=1))
    loss = float(np.mean(lse - logits[np.arange(n), y]))
    P = np.exp(logits - lse[:, None])
    resid = P[:, :-1].copy()
    free = np.flatnonzero(y < n_classes - 1)  # reference-class rows subtract nothing
    resid[free, y[free]] -= 1.0
    grad = np.empty_like(B)
    grad[:, 0] = resid.sum(axis=0) / n
    grad[:, 1:] = resid.T @ X / n
    if l2 > 0.0:
        loss += 0.5 * l2 * float((B[:, 1:] ** 2).sum())
        grad[:, 1:] += l2 * B[:, 1:]
    return loss, grad


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

def _standardize(X: np.ndarray):
    mu = X.mean(axis=0) if len(X) else np.zeros(X.shape[1])
    sigma = X.std(axis=0) if len(X) else np.ones(X.shape[1])
    sigma = np.where(sigma > 0, sigma, 1.0)
    return (X - mu) / sigma, mu, sigma


def _destandardize_logistic(beta_std, mu, sigma) -> np.ndarray:
    """Map standardized-unit coefficients back to original units.

    sigmoid(b0 + sum b_j (x_j - mu_j) / sigma_j) must equal
    sigmoid(c0 + sum c_j x_j) for every x.
    """
    beta = np.empty_like(beta_std)
    beta[1:] = beta_std[1:] / sigma
    beta[0] = beta_std[0] - float((beta_std[1:] * mu / sigma).sum())
    return beta


def _destandardize_rows(rows_std, mu, sigma) -> np.ndarray:
    out = np.empty_like(rows_std)
    out[:, 1:] = rows_std[:, 1:] / sigma[None, :]
    out[:, 0] = rows_std[:, 0] - (rows_std[:, 1:] * (mu / sigma)[None, :]).sum(axis=1)
    return out


def _descend(loss_grad, theta, options: TrainOptions):
    loss, grad = loss_grad(theta)
    if not np.isfinite(loss):
        raise NumericError("non-finite loss at iteration 0")
    for it in range(options.max_iterations):
        if float(np.linalg.norm(grad)) <= options.gradient_tolerance:
            break
        lr = options.learning_rate
        while True:
            cand = theta - lr * grad
            cand_loss, cand_grad = loss_grad(cand)
            if not np.isfinite(cand_loss):
                raise NumericError(f"non-finite loss at iteration {it + 1}")
            if cand_loss <= loss:
                break
            lr /= 2.0
            if lr < 1e-20:
                return theta  # no descent direction left at float precision
        theta, loss, grad = cand, cand_loss, cand_grad
    return theta


def fit_logistic(data: Dataset, train_rows, options: TrainOptions = TrainOptions()) -> LogisticModel:
    """Fit the binary model on the given rows; labels must be 0/1."""
    if data.n_classes != 2:
        raise ModelTaskError(
            f"logistic regression needs a 2-class dataset, got k={data.n_classes}; "
            "use the multinomial model"
        )
    rows = np.asarray(train_rows, dtype=np.int64)
    X, y = data.X[rows], data.y[rows]
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("training rows contain a single class")
    Xs, mu, sigma = _standardize(X)
    theta0 = np.zeros(data.n_features + 1)
    theta = _descend(
        lambda b: logistic_loss_grad(b, Xs, y, options.l2_penalty), theta0, options
    )
    return LogisticModel(
        beta=_destandardize_logistic(theta, mu, sigma),
        feature_names=data.feature_names,
        class_names=data.class_names,
    )


def fit_multinomial(data: Dataset, train_rows, options: TrainOptions = TrainOptions()) -> MultinomialModel:
    """Fit the k-class reference-class softmax model on the given rows."""
    rows = np.asarray(train_rows, dtype=np.int64)
    X, y = data.X[rows], data.y[rows]
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("training rows contain a single class")
    k = data.n_classes
    Xs, mu, sigma = _standardize(X)
    shape = (k - 1, data.n_features + 1)
    theta0 = np.zeros(shape)
    theta = _descend(
        lambda b: _flat_multinomial(b, Xs, y, k, options.l2_penalty, shape),
        theta0.ravel(), options,
    ).reshape(shape)
    beta = np.zeros((k, data.n_features + 1))
    beta[:-1] = _destandardize_rows(theta, mu, sigma)
    return MultinomialModel(
        beta=beta,
        feature_names=data.feature_names,
        class_names=data.class_names,
    )


def _flat_multinomial(flat, X, y, k, l2, shape):
    loss, grad = multinomial_loss_grad(flat.reshape(shape), X, y, k, l2)
    return loss, grad.ravel()


# ---------------------------------------------------------------------------
# Persistence: plain-text coefficient tables
# ---------------------------------------------------------------------------

def save_model(model, path) -> None:
    if isinstance(model, LogisticModel):
        lines = ["model: logistic",
                 "classes: " + ",".join(model.class_names),
                 "feature\tcoefficient",
                 "(intercept)\t" + repr(float(model.beta[0]))]
        names = model.feature_names or tuple(
            f"x{i}" for i in range(model.n_features)
        )
        for name, value in zip(names, model.beta[1:]):
            lines.append(f"{name}\t{float(value)!r}")
    elif isinstance(model, MultinomialModel):
        lines = ["model: multinomial",
                 "classes: " + ",".join(model.class_names),
                 "feature\t" + "\t".join(model.class_names)]
        names = ("(intercept)",) + (
            model.feature_names
            or tuple(f"x{i}" for i in range(model.n_features))
        )
        for j, name in enumerate(names):
            row = "\t".join(repr(float(v)) for v in model.beta[:, j])
            lines.append(f"{name}\t{row}")
    else:
        raise TypeError(f"cannot save model of type {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("model: "):
        raise ModelTaskError(f"{path}: not a coefficient table")
    kind = lines[0].split(": ", 1)[1]
    class_names = tuple(lines[1].split(": ", 1)[1].split(","))
    body = lines[3:]
    names = tuple(line.split("\t")[0] for line in body[1:])  # skip intercept
    if kind == "logistic":
        beta = np.array([float(line.split("\t")[1]) for line in body])
        return LogisticModel(beta=beta, feature_names=names,
                             class_names=class_names)
    if kind == "multinomial":
        rows = [line.split("\t")[1:] for line in body]
        beta = np.array([[float(v) for v in row] for row in rows]).T
        return MultinomialModel(beta=beta, feature_names=names,
                                class_names=class_names)
    raise ModelTaskError(f"{path}: unknown model kind {kind!r}")
