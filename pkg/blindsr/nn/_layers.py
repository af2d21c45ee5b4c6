"""Layers with explicit forward and backward passes.

A :class:`Module` caches what its backward pass needs during ``forward``;
``backward`` takes the gradient of the output, accumulates parameter
gradients into :attr:`Parameter.grad` and returns the gradient of the input.
Only the most recent forward pass can be differentiated.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from . import _functional as F

logger = logging.getLogger(__name__)


class Parameter:
    """Trainable array with a gradient slot of the same shape."""

    __slots__ = ('data', 'grad')

    def __init__(self, data):
        self.data = np.asarray(data)
        self.grad = np.zeros_like(self.data)

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def __repr__(self):
        return "Parameter(shape={}, dtype={})".format(self.data.shape,
                                                      self.data.dtype)


@dataclass(frozen=True, eq=False)
class LayerParams:
    """Weights, and optionally biases, of one convolution or FC layer."""

    weight: np.ndarray
    bias: np.ndarray = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.weight)) or (
                self.bias is not None and not np.all(np.isfinite(self.bias))):
            raise ValueError("Layer parameters must be finite")


def kaiming_normal(shape, fan_in, rng):
    """He initialization, standard deviation ``sqrt(2 / fan_in)``."""
    return rng.standard_normal(shape) * np.sqrt(2. / fan_in)


def _rng(rng):
    return np.random.default_rng() if rng is None else rng


class Module:
    """Base class of all layers and networks."""

    def __init__(self):
        object.__setattr__(self, '_parameters', OrderedDict())
        object.__setattr__(self, '_modules', OrderedDict())

    def __setattr__(self, name, value):
        if isinstance(value, Parameter):
            self._parameters[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def children(self):
        return list(self._modules.values())

    def named_parameters(self, prefix=''):
        """Yield ``(dotted_name, Parameter)`` pairs in a fixed order."""
        for name, param in self._parameters.items():
            yield prefix + name, param
        for name, module in self._modules.items():
            yield from module.named_parameters(prefix + name + '.')

    def parameters(self):
        return [param for _, param in self.named_parameters()]

    def num_parameters(self):
        return int(sum(param.data.size for param in self.parameters()))

    def zero_grad(self):
        for param in self.parameters():
            param.zero_grad()

    def astype(self, dtype):
        """Convert all parameters to `dtype` in place."""
        for param in self.parameters():
            param.data = param.data.astype(dtype)
            param.grad = np.zeros_like(param.data)
        return self

    def state_dict(self):
        """Return copies of all parameter arrays by name."""
        return OrderedDict(
            (name, param.data.copy())
            for name, param in self.named_parameters())

    def load_state_dict(self, state):
        """Replace all parameter arrays.

        Raises
        ------
        KeyError
            if a parameter is missing or unexpected.
        ValueError
            if a shape differs.
        """
        params = dict(self.named_parameters())
        missing = sorted(set(params) - set(state))
        unexpected = sorted(set(state) - set(params))
        if missing or unexpected:
            raise KeyError(
                "Parameter names do not match, missing: {}, unexpected: "
                "{}".format(missing, unexpected))
        for name, param in params.items():
            value = np.asarray(state[name])
            if value.shape != param.data.shape:
                raise ValueError(
                    "Parameter {} has shape {}, got {}".format(
                        name, param.data.shape, value.shape))
            param.data = value.copy()
            param.grad = np.zeros_like(param.data)


class Conv2d(Module):
    """2-D convolution (cross-correlation), stride 1, 'same' output size.

    Parameters
    ----------
    in_channels, out_channels: int
    kernel_size: int
        Odd kernel width.
    padding: str
        ``'zero'`` or ``'reflect'``.
    groups: int
    bias: bool
    rng: numpy.random.Generator, optional
        Source of the Kaiming initialization.
    zero_init: bool
        Start from all-zero weights.
    """

    def __init__(self,
                 in_channels,
                 out_channels,
                 kernel_size=3,
                 padding='zero',
                 groups=1,
                 bias=True,
                 rng=None,
                 zero_init=False):
        super().__init__()
        if in_channels % groups or out_channels % groups:
            raise ValueError(
                "Channels {} -> {} are not divisible by groups={}".format(
                    in_channels, out_channels, groups))
        if padding not in F.PADDING_MODES:
            raise ValueError("Unknown padding {!r}".format(padding))
        self.padding = padding
        self.groups = groups
        shape = (out_channels, in_channels // groups, kernel_size,
                 kernel_size)
        if zero_init:
            weight = np.zeros(shape)
        else:
            fan_in = shape[1] * kernel_size * kernel_size
            weight = kaiming_normal(shape, fan_in, _rng(rng))
        self.weight = Parameter(weight)
        self.bias = Parameter(np.zeros(out_channels)) if bias else None
        self._cache = None

    @property
    def params(self):
        """Current weights and biases as :class:`LayerParams`."""
        bias = None if self.bias is None else self.bias.data
        return LayerParams(self.weight.data, bias)

    @classmethod
    def from_params(cls, params, padding='zero', groups=1):
        """Build a convolution holding copies of `params`."""
        c_out, c_in, ksize = params.weight.shape[:3]
        conv = cls(c_in * groups,
                   c_out,
                   ksize,
                   padding,
                   groups=groups,
                   bias=params.bias is not None,
                   zero_init=True)
        conv.weight = Parameter(params.weight.copy())
        if params.bias is not None:
            conv.bias = Parameter(params.bias.copy())
        return conv

    def forward(self, x):
        bias = None if self.bias is None else self.bias.data
        out, self._cache = F.conv2d_forward(x, self.weight.data, bias,
                                            self.padding, self.groups)
        return out

    def backward(self, grad):
        grad_x, grad_weight, grad_bias = F.conv2d_backward(grad, self._cache)
        self.weight.grad += grad_weight
        if self.bias is not None:
            self.bias.grad += grad_bias
        return grad_x


class Linear(Module):
    """Fully connected layer on ``(batch, features)`` inputs."""

    def __init__(self, in_features, out_features, bias=True, rng=None):
        super().__init__()
        self.weight = Parameter(
            kaiming_normal((out_features, in_features), in_features,
                           _rng(rng)))
        self.bias = Parameter(np.zeros(out_features)) if bias else None
        self._cache = None

    def forward(self, x):
        bias = None if self.bias is None else self.bias.data
        out, self._cache = F.linear_forward(x, self.weight.data, bias)
        return out

    def backward(self, grad):
        grad_x, grad_weight, grad_bias = F.linear_backward(grad, self._cache)
        self.weight.grad += grad_weight
        if self.bias is not None:
            self.bias.grad += grad_bias
        return grad_x


class ReLU(Module):

    def forward(self, x):
        out, self._mask = F.relu_forward(x)
        return out

    def backward(self, grad):
        return F.relu_backward(grad, self._mask)


class Sigmoid(Module):

    def forward(self, x):
        out, self._out = F.sigmoid_forward(x)
        return out

    def backward(self, grad):
        return F.sigmoid_backward(grad, self._out)


class AvgPool2d(Module):
    """Average pooling over non-overlapping square windows."""

    def __init__(self, kernel_size=2):
        super().__init__()
        self.kernel_size = kernel_size

    def forward(self, x):
        out, self._cache = F.avg_pool_forward(x, self.kernel_size)
        return out

    def backward(self, grad):
        return F.avg_pool_backward(grad, self._cache)


class GlobalAvgPool2d(Module):

    def forward(self, x):
        out, self._shape = F.global_avg_pool_forward(x)
        return out

    def backward(self, grad):
        return F.global_avg_pool_backward(grad, self._shape)


class PixelShuffle(Module):
    """Sub-pixel rearrangement of channels into space."""

    def __init__(self, scale):
        super().__init__()
        self.scale = scale

    def forward(self, x):
        return F.pixel_shuffle_forward(x, self.scale)

    def backward(self, grad):
        return F.pixel_shuffle_backward(grad, self.scale)


class Sequential(Module):
    """Chain of modules applied in order."""

    def __init__(self, *modules):
        super().__init__()
        for index, module in enumerate(modules):
            setattr(self, str(index), module)

    def __len__(self):
        return len(self._modules)

    def __getitem__(self, index):
        return self.children()[index]

    def forward(self, x):
        for module in self._modules.values():
            x = module.forward(x)
        return x

    def backward(self, grad):
        for module in reversed(self.children()):
            grad = module.backward(grad)
        return grad


class ResidualBlock(Module):
    """``x + conv2(relu(conv1(x)))`` with an identity skip.

    The second convolution starts at zero, so a fresh block is the identity.
    """

    def __init__(self,
                 channels,
                 kernel_size=3,
                 padding='zero',
                 rng=None,
                 zero_init=True):
        super().__init__()
        rng = _rng(rng)
        self.conv1 = Conv2d(channels, channels, kernel_size, padding, rng=rng)
        self.relu = ReLU()
        self.conv2 = Conv2d(channels,
                            channels,
                            kernel_size,
                            padding,
                            rng=rng,
                            zero_init=zero_init)

    def forward(self, x):
        if x.shape[1] != self.conv1.weight.shape[1]:
            raise ValueError(
                "Residual block for {} channels got input of shape {}".format(
                    self.conv1.weight.shape[1], x.shape))
        return x + self.conv2.forward(self.relu.forward(self.conv1.forward(x)))

    def backward(self, grad):
        inner = self.conv1.backward(
            self.relu.backward(self.conv2.backward(grad)))
        return grad + inner


class BottleneckBlock(Module):
    """1x1 reduce, 3x3, 1x1 expand, each of the first two followed by ReLU.

    The block output is ``x + expand(...)`` without a final activation.
    """

    def __init__(self,
                 channels,
                 reduced_channels,
                 kernel_size=3,
                 padding='zero',
                 rng=None,
                 zero_init=True):
        super().__init__()
        rng = _rng(rng)
        self.reduce = Conv2d(channels, reduced_channels, 1, rng=rng)
        self.relu1 = ReLU()
        self.conv = Conv2d(reduced_channels,
                           reduced_channels,
                           kernel_size,
                           padding,
                           rng=rng)
        self.relu2 = ReLU()
        self.expand = Conv2d(reduced_channels,
                             channels,
                             1,
                             rng=rng,
                             zero_init=zero_init)

    def forward(self, x):
        if x.shape[1] != self.reduce.weight.shape[1]:
            raise ValueError(
                "Bottleneck block for {} channels got input of shape "
                "{}".format(self.reduce.weight.shape[1], x.shape))
        h = self.relu1.forward(self.reduce.forward(x))
        h = self.relu2.forward(self.conv.forward(h))
        return x + self.expand.forward(h)

    def backward(self, grad):
        h = self.relu2.backward(self.expand.backward(grad))
        h = self.relu1.backward(self.conv.backward(h))
        return grad + self.reduce.backward(h)
