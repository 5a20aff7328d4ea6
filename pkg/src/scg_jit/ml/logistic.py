from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.special import expit

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-6
ARMIJO = 0.5
MIN_STEP = 1e-12

Array = npt.NDArray[np.float64]


@dataclass(frozen=True)
class LogisticModel:
    weights: Array
    bias: float
    iterations: int
    converged: bool

    def decision_function(self, X: Array) -> Array:
        return X @ self.weights + self.bias

    def predict(self, X: Array) -> npt.NDArray[np.int64]:
        # sigmoid(z) >= 0.5 exactly when z >= 0
        return (self.decision_function(X) >= 0).astype(np.int64)


def log_loss(weights: Array, bias: float, X: Array, y: Array, l2: float) -> float:
    """Mean log-loss plus ||w||^2 / (2 * l2 * n); the bias is not penalized."""
    n = len(y)
    z = X @ weights + bias
    data = np.mean(np.logaddexp(0.0, z) - y * z)
    return float(data + weights @ weights / (2.0 * l2 * n))


def log_loss_gradient(weights: Array, bias: float, X: Array, y: Array, l2: float) -> tuple[Array, float]:
    n = len(y)
    residual = expit(X @ weights + bias) - y
    return X.T @ residual / n + weights / (l2 * n), float(residual.mean())


def fit_logistic(X: Array, y: Array, l2: float = 1.0, max_iter: int = 200) -> LogisticModel:
    """Batch gradient descent with Armijo backtracking.

    Every accepted step satisfies the sufficient-decrease condition, so the loss is
    non-increasing over the iterations.
    """
    y = y.astype(np.float64)
    w = np.zeros(X.shape[1])
    b = 0.0
    step = 1.0
    loss = log_loss(w, b, X, y, l2)
    converged = False
    iteration = 0

    for iteration in range(1, max_iter + 1):
        gw, gb = log_loss_gradient(w, b, X, y, l2)
        if max(np.max(np.abs(gw), initial=0.0), abs(gb)) < GRADIENT_TOLERANCE:
            converged = True
            break
        sq_norm = float(gw @ gw + gb * gb)
        t = step
        while True:
            w_new, b_new = w - t * gw, b - t * gb
            new_loss = log_loss(w_new, b_new, X, y, l2)
            if new_loss <= loss - ARMIJO * t * sq_norm or t < MIN_STEP:
                break
            t *= 0.5
        if new_loss > loss:
            logger.debug(f"Line search stalled at iteration {iteration}")
            break
        w, b, loss = w_new, b_new, new_loss
        step = min(2.0 * t, 1e3)

    logger.debug(f"Logistic regression: {iteration} iteration(s), loss {loss:.6g}, converged={converged}")
    return LogisticModel(w, b, iteration, converged)
