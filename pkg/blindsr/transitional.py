"""Transitional layers: per-sample interpolation of two parameter sets.

A transitional layer holds two primary parameter sets ``theta0`` (weakest
degradation) and ``theta1`` (strongest degradation). Sample ``b`` of a batch
is processed with::

    theta(tau_b) = (1 - tau_b) * theta0 + tau_b * theta1

All samples are handled in a single grouped convolution: the batch is
folded into the channel axis and the ``B`` interpolated kernels become
``B`` convolution groups.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .nn import (Conv2d, LayerParams, Module, Parameter, ReLU, ResidualBlock,
                 conv2d_backward, conv2d_forward, kaiming_normal)

logger = logging.getLogger(__name__)


def check_taus(taus, batch):
    """Validate a per-sample DoT vector and return it as an array."""
    taus = np.asarray(taus, dtype=np.float64).reshape(-1)
    if taus.shape[0] != batch:
        raise ValueError("Got {} DoT values for a batch of {}".format(
            taus.shape[0], batch))
    if np.any(taus < 0.) or np.any(taus > 1.):
        raise ValueError("DoT values must lie in [0, 1], got {}".format(taus))
    return taus


@dataclass(frozen=True, eq=False)
class TransitionalParams:
    """Pair of primary parameter sets of identical shapes."""

    theta0: LayerParams
    theta1: LayerParams

    def __post_init__(self):
        if self.theta0.weight.shape != self.theta1.weight.shape:
            raise ValueError(
                "Primary weights differ in shape: {} and {}".format(
                    self.theta0.weight.shape, self.theta1.weight.shape))
        if (self.theta0.bias is None) != (self.theta1.bias is None):
            raise ValueError("Either both or neither primary have a bias")
        if (self.theta0.bias is not None
                and self.theta0.bias.shape != self.theta1.bias.shape):
            raise ValueError("Primary biases differ in shape")

    @property
    def has_bias(self):
        return self.theta0.bias is not None


def interpolate_params(tp, tau):
    """Parameters of the network at DoT `tau`.

    ``(1 - tau) * theta0 + tau * theta1`` over weights and biases, so
    ``tau = 0`` gives ``theta0`` and ``tau = 1`` gives ``theta1`` exactly.

    Raises
    ------
    ValueError
        if `tau` is outside ``[0, 1]``.
    """
    if not 0. <= tau <= 1.:
        raise ValueError("tau must lie in [0, 1], got {}".format(tau))
    weight = (1. - tau) * tp.theta0.weight + tau * tp.theta1.weight
    bias = None
    if tp.has_bias:
        bias = (1. - tau) * tp.theta0.bias + tau * tp.theta1.bias
    return LayerParams(weight, bias)


def _blend(taus, first, second):
    """Stack ``(1 - tau_b) * first + tau_b * second`` along a new axis."""
    shape = (-1, ) + (1, ) * first.ndim
    taus = taus.astype(first.dtype).reshape(shape)
    return (1. - taus) * first[None] + taus * second[None]


class TransitionalConv2d(Module):
    """Convolution whose parameters are interpolated per sample.

    Parameters
    ----------
    in_channels, out_channels: int
    kernel_size: int
    padding: str
        ``'zero'`` or ``'reflect'``.
    bias: bool
    rng: numpy.random.Generator, optional
    zero_init: bool
        Start both primaries at zero.

    Both primaries start from the same initialization.
    """

    def __init__(self,
                 in_channels,
                 out_channels,
                 kernel_size=3,
                 padding='zero',
                 bias=True,
                 rng=None,
                 zero_init=False):
        super().__init__()
        shape = (out_channels, in_channels, kernel_size, kernel_size)
        if zero_init:
            weight = np.zeros(shape)
        else:
            rng = np.random.default_rng() if rng is None else rng
            weight = kaiming_normal(shape, in_channels * kernel_size**2, rng)
        self.padding = padding
        self.weight0 = Parameter(weight.copy())
        self.weight1 = Parameter(weight.copy())
        if bias:
            self.bias0 = Parameter(np.zeros(out_channels))
            self.bias1 = Parameter(np.zeros(out_channels))
        else:
            self.bias0 = self.bias1 = None
        self._cache = None

    @property
    def params(self):
        """The primaries as :class:`TransitionalParams`."""
        bias0 = None if self.bias0 is None else self.bias0.data
        bias1 = None if self.bias1 is None else self.bias1.data
        return TransitionalParams(LayerParams(self.weight0.data, bias0),
                                  LayerParams(self.weight1.data, bias1))

    def materialize(self, tau):
        """Plain convolution with the parameters interpolated at `tau`."""
        return Conv2d.from_params(interpolate_params(self.params, tau),
                                  self.padding)

    def forward(self, x, taus):
        batch, c_in, height, width = x.shape
        taus = check_taus(taus, batch)
        weights = _blend(taus, self.weight0.data, self.weight1.data)
        c_out = weights.shape[1]
        bias = None
        if self.bias0 is not None:
            bias = _blend(taus, self.bias0.data, self.bias1.data).reshape(-1)
        out, conv_cache = conv2d_forward(
            x.reshape(1, batch * c_in, height, width),
            weights.reshape((batch * c_out, ) + weights.shape[2:]),
            bias,
            self.padding,
            groups=batch)
        self._cache = (conv_cache, taus, x.shape)
        return out.reshape(batch, c_out, height, width)

    def backward(self, grad):
        """Return the gradients of the input and of the DoT vector."""
        conv_cache, taus, x_shape = self._cache
        batch = x_shape[0]
        c_out = self.weight0.shape[0]
        grad_x, grad_weight, grad_bias = conv2d_backward(
            grad.reshape((1, batch * c_out) + grad.shape[2:]), conv_cache)
        grad_weight = grad_weight.reshape((batch, ) + self.weight0.shape)
        t = taus.reshape(-1, 1, 1, 1, 1)
        self.weight0.grad += np.sum((1. - t) * grad_weight, axis=0)
        self.weight1.grad += np.sum(t * grad_weight, axis=0)
        delta = self.weight1.data - self.weight0.data
        grad_taus = np.sum(grad_weight * delta[None], axis=(1, 2, 3, 4))
        if self.bias0 is not None:
            grad_bias = grad_bias.reshape(batch, c_out)
            t = taus.reshape(-1, 1)
            self.bias0.grad += np.sum((1. - t) * grad_bias, axis=0)
            self.bias1.grad += np.sum(t * grad_bias, axis=0)
            grad_taus = grad_taus + grad_bias @ (self.bias1.data -
                                                 self.bias0.data)
        return grad_x.reshape(x_shape), grad_taus


class TransitionalResidualBlock(Module):
    """Residual block ``x + conv2(relu(conv1(x)))`` of transitional convs."""

    def __init__(self, channels, kernel_size=3, padding='zero', rng=None):
        super().__init__()
        self.padding = padding
        self.conv1 = TransitionalConv2d(channels,
                                        channels,
                                        kernel_size,
                                        padding,
                                        rng=rng)
        self.relu = ReLU()
        self.conv2 = TransitionalConv2d(channels,
                                        channels,
                                        kernel_size,
                                        padding,
                                        rng=rng,
                                        zero_init=True)

    def materialize(self, tau):
        """Plain residual block with the parameters interpolated at `tau`."""
        channels, _, kernel_size = self.conv1.weight0.shape[:3]
        block = ResidualBlock(channels, kernel_size, self.padding,
                              rng=np.random.default_rng(0))
        block.conv1 = self.conv1.materialize(tau)
        block.conv2 = self.conv2.materialize(tau)
        return block

    def forward(self, x, taus):
        hidden = self.relu.forward(self.conv1.forward(x, taus))
        return x + self.conv2.forward(hidden, taus)

    def backward(self, grad):
        grad_hidden, grad_taus2 = self.conv2.backward(grad)
        grad_x, grad_taus1 = self.conv1.backward(
            self.relu.backward(grad_hidden))
        return grad + grad_x, grad_taus1 + grad_taus2


def transitional_forward(x, taus, module, per_sample=False):
    """Run a transitional module with one DoT per sample.

    Parameters
    ----------
    x: numpy.ndarray
        ``(B, C, H, W)`` batch.
    taus: sequence of float
        ``B`` DoT values in ``[0, 1]``.
    module: TransitionalConv2d or TransitionalResidualBlock
    per_sample: bool
        Loop over the samples with separately materialized plain modules
        instead of one grouped convolution.

    Returns
    -------
    numpy.ndarray
    """
    taus = check_taus(taus, x.shape[0])
    if not per_sample:
        return module.forward(x, taus)
    outputs = [
        module.materialize(tau).forward(x[b:b + 1])
        for b, tau in enumerate(taus)
    ]
    return np.concatenate(outputs, axis=0)


def bilinear_expansion_check(tp, x0, x1, tau, nonlinearity=None,
                             padding='zero'):
    """Residual of the four-term expansion of one interpolated convolution.

    With ``F_a(x)`` the convolution with parameters ``a``, this evaluates::

        F_t(t x0 + (1 - t) x1)
          - [t^2 F_0(x0) + t (1 - t) F_1(x0)
             + t (1 - t) F_0(x1) + (1 - t)^2 F_1(x1)]

    where ``F_t`` uses ``t * theta0 + (1 - t) * theta1``, and returns its
    largest absolute value. The expansion is exact for a bias-free linear
    convolution; with ``nonlinearity='relu'`` applied after each
    convolution it generally is not.

    Raises
    ------
    ValueError
        if the parameters carry a bias or the nonlinearity is unknown.
    """
    if tp.has_bias:
        raise ValueError("The expansion only holds for bias-free layers")
    if nonlinearity not in (None, 'relu'):
        raise ValueError("Unknown nonlinearity {!r}".format(nonlinearity))
    if x0.shape != x1.shape:
        raise ValueError("Inputs differ in shape: {} and {}".format(
            x0.shape, x1.shape))

    def layer(weight, x):
        out, _ = conv2d_forward(x, weight, None, padding)
        if nonlinearity == 'relu':
            out = np.maximum(out, 0.)
        return out

    w0 = tp.theta0.weight
    w1 = tp.theta1.weight
    mixed = layer(tau * w0 + (1. - tau) * w1, tau * x0 + (1. - tau) * x1)
    expansion = (tau**2 * layer(w0, x0) + tau * (1. - tau) * layer(w1, x0) +
                 tau * (1. - tau) * layer(w0, x1) +
                 (1. - tau)**2 * layer(w1, x1))
    return float(np.max(np.abs(mixed - expansion)))


def tau_continuity(model, x, grid):
    """Largest output change per unit DoT between neighbouring grid points.

    Parameters
    ----------
    model: Module
        Called as ``model.forward(x, taus)``.
    x: numpy.ndarray
        ``(B, C, H, W)`` batch.
    grid: sequence of float
        Increasing DoT values.

    Returns
    -------
    float
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("DoT grid must be increasing with at least 2 points")
    batch = x.shape[0]
    previous = model.forward(x, np.full(batch, grid[0]))
    worst = 0.
    for low, high in zip(grid[:-1], grid[1:]):
        current = model.forward(x, np.full(batch, high))
        rate = np.max(np.abs(current - previous)) / (high - low)
        worst = max(worst, float(rate))
        previous = current
    return worst
