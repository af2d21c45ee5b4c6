"""Training losses and numerical health checks."""
import numpy as np


class NumericalError(Exception):
    """Exception raised when a loss or gradient stops being finite."""


def check_finite(value, what):
    """Raise NumericalError if `value` contains NaN or infinity."""
    if not np.all(np.isfinite(value)):
        raise NumericalError("Non-finite {} encountered".format(what))


def l1_loss(pred, target):
    """Mean absolute error and its gradient with respect to `pred`.

    The subgradient at exact ties is zero.

    Returns
    -------
    tuple(float, numpy.ndarray)
    """
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ValueError("Prediction shape {} differs from target {}".format(
            pred.shape, target.shape))
    diff = pred - target
    loss = float(np.mean(np.abs(diff)))
    grad = np.sign(diff) / diff.size
    return loss, grad.astype(pred.dtype, copy=False)
