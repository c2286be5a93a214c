"""Regression loss."""

import numpy as np

from ..errors import NumericError, ShapeError


def mse_loss(predictions, targets):
    """Mean squared error and its gradient with respect to the predictions.

    Returns ``(loss, grad)`` where ``grad[k] = 2 * (prediction[k] - target[k]) / n``.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ShapeError(
            f"mse_loss shapes differ: {predictions.shape} vs {targets.shape}"
        )
    if predictions.size == 0:
        raise ShapeError("mse_loss needs at least one element")
    diff = predictions - targets
    loss = float(np.mean(diff ** 2))
    if not np.isfinite(loss):
        raise NumericError("mse_loss produced a non-finite value")
    grad = (2.0 / diff.size) * diff
    return loss, grad
