"""Array-level forward and backward passes of the network operations.

Every ``*_forward`` function returns ``(output, cache)`` and the matching
``*_backward`` function turns the gradient of the output and that cache into
gradients of the inputs. Feature maps are ``(batch, channels, height,
width)`` arrays; convolutions use stride 1 and keep the spatial size.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

PADDING_MODES = ('zero', 'reflect')


def _pad(x, pad, mode):
    if pad == 0:
        return x
    widths = ((0, 0), (0, 0), (pad, pad), (pad, pad))
    if mode == 'zero':
        return np.pad(x, widths, mode='constant')
    return np.pad(x, widths, mode='reflect')


def _unpad(grad, pad, mode, height, width):
    """Fold the gradient of a padded map back onto the unpadded map."""
    if pad == 0:
        return grad
    if mode == 'zero':
        return grad[:, :, pad:pad + height, pad:pad + width]
    rows = np.pad(np.arange(height), pad, mode='reflect')
    cols = np.pad(np.arange(width), pad, mode='reflect')
    folded = np.zeros(grad.shape[:2] + (height, grad.shape[3]),
                      dtype=grad.dtype)
    np.add.at(folded, (slice(None), slice(None), rows), grad)
    result = np.zeros(grad.shape[:2] + (height, width), dtype=grad.dtype)
    np.add.at(result, (slice(None), slice(None), slice(None), cols), folded)
    return result


def _columns(xp, ksize, height, width):
    """Unfold one padded ``(channels, Hp, Wp)`` map into a patch matrix."""
    windows = sliding_window_view(xp, (ksize, ksize), axis=(1, 2))
    return windows.transpose(1, 2, 0, 3, 4).reshape(height * width, -1)


def check_conv_shapes(x, weight, bias, groups):
    """Validate the shapes of a grouped convolution."""
    if x.ndim != 4:
        raise ValueError("Convolution input must be 4-D, got shape {}".format(
            x.shape))
    c_out, c_in_group, ksize, ksize2 = weight.shape
    if ksize != ksize2 or ksize % 2 == 0:
        raise ValueError(
            "Convolution kernels must be square with odd size, got {}".format(
                weight.shape))
    if groups < 1 or x.shape[1] % groups or c_out % groups:
        raise ValueError(
            "Invalid groups={} for {} input and {} output channels".format(
                groups, x.shape[1], c_out))
    if x.shape[1] // groups != c_in_group:
        raise ValueError(
            "Weight shape {} does not match {} input channels in {} "
            "groups".format(weight.shape, x.shape[1], groups))
    if bias is not None and bias.shape != (c_out, ):
        raise ValueError("Bias shape {} does not match {} outputs".format(
            bias.shape, c_out))


def conv2d_forward(x, weight, bias=None, padding='zero', groups=1):
    """Grouped cross-correlation with 'same' output size.

    Parameters
    ----------
    x: numpy.ndarray
        ``(B, C_in, H, W)`` input.
    weight: numpy.ndarray
        ``(C_out, C_in / groups, k, k)`` kernels, `k` odd.
    bias: numpy.ndarray, optional
        ``(C_out,)`` offsets.
    padding: str
        ``'zero'`` or ``'reflect'``.
    groups: int
        Number of independent channel groups.

    Returns
    -------
    tuple
        ``(B, C_out, H, W)`` output and the cache for
        :func:`conv2d_backward`.
    """
    if padding not in PADDING_MODES:
        raise ValueError("Unknown padding {!r}, choose from {}".format(
            padding, PADDING_MODES))
    check_conv_shapes(x, weight, bias, groups)
    batch, c_in, height, width = x.shape
    c_out, c_in_group, ksize = weight.shape[:3]
    c_out_group = c_out // groups
    pad = ksize // 2
    if pad and padding == 'reflect' and pad >= min(height, width):
        raise ValueError(
            "Reflect padding of {} needs maps larger than {}x{}".format(
                pad, height, width))
    xp = _pad(x, pad, padding)
    dtype = np.result_type(x, weight)
    out = np.empty((batch, c_out, height, width), dtype=dtype)
    flat = weight.reshape(c_out, -1)
    for b in range(batch):
        for g in range(groups):
            inputs = slice(g * c_in_group, (g + 1) * c_in_group)
            outputs = slice(g * c_out_group, (g + 1) * c_out_group)
            cols = _columns(xp[b, inputs], ksize, height, width)
            kernels = flat[outputs].copy()
            out[b, outputs] = (kernels @ cols.T).reshape(
                c_out_group, height, width)
    if bias is not None:
        out += bias[None, :, None, None]
    cache = (x.shape, xp, weight, bias is not None, padding, groups)
    return out, cache


def conv2d_backward(grad, cache):
    """Gradients of :func:`conv2d_forward`.

    Returns
    -------
    tuple
        ``(grad_x, grad_weight, grad_bias)``; `grad_bias` is None for a
        convolution without bias.
    """
    x_shape, xp, weight, has_bias, padding, groups = cache
    batch, c_in, height, width = x_shape
    c_out, c_in_group, ksize = weight.shape[:3]
    c_out_group = c_out // groups
    pad = ksize // 2
    flat = weight.reshape(c_out, -1)
    grad_flat = np.zeros_like(flat)
    grad_xp = np.zeros_like(xp)
    for b in range(batch):
        for g in range(groups):
            inputs = slice(g * c_in_group, (g + 1) * c_in_group)
            outputs = slice(g * c_out_group, (g + 1) * c_out_group)
            cols = _columns(xp[b, inputs], ksize, height, width)
            grad_out = grad[b, outputs].reshape(c_out_group, height * width)
            grad_flat[outputs] += grad_out @ cols
            grad_cols = (flat[outputs].T @ grad_out).reshape(
                c_in_group, ksize, ksize, height, width)
            target = grad_xp[b, inputs]
            for i in range(ksize):
                for j in range(ksize):
                    target[:, i:i + height, j:j + width] += grad_cols[:, i, j]
    grad_x = _unpad(grad_xp, pad, padding, height, width)
    grad_bias = grad.sum(axis=(0, 2, 3)) if has_bias else None
    return grad_x, grad_flat.reshape(weight.shape), grad_bias


def linear_forward(x, weight, bias=None):
    """Fully connected layer, ``(B, in)`` inputs and ``(out, in)`` weights."""
    if x.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise ValueError("Input shape {} does not match weights {}".format(
            x.shape, weight.shape))
    # Row by row, so a sample's output does not depend on its position.
    out = np.einsum('ni,oi->no', x, weight)
    if bias is not None:
        out = out + bias
    return out, (x, weight, bias is not None)


def linear_backward(grad, cache):
    x, weight, has_bias = cache
    grad_bias = grad.sum(axis=0) if has_bias else None
    return grad @ weight, grad.T @ x, grad_bias


def relu_forward(x):
    mask = x > 0
    return np.where(mask, x, 0.).astype(x.dtype, copy=False), mask


def relu_backward(grad, mask):
    return np.where(mask, grad, 0.).astype(grad.dtype, copy=False)


def sigmoid_forward(x):
    out = 0.5 * (1. + np.tanh(0.5 * x))
    return out, out


def sigmoid_backward(grad, out):
    return grad * out * (1. - out)


def avg_pool_forward(x, ksize):
    """Average over non-overlapping ``ksize x ksize`` windows."""
    batch, channels, height, width = x.shape
    if height % ksize or width % ksize:
        raise ValueError(
            "Map size {}x{} is not divisible by the pool size {}".format(
                height, width, ksize))
    blocks = x.reshape(batch, channels, height // ksize, ksize,
                       width // ksize, ksize)
    return blocks.mean(axis=(3, 5)), (x.shape, ksize)


def avg_pool_backward(grad, cache):
    shape, ksize = cache
    grad = grad / (ksize * ksize)
    return np.repeat(np.repeat(grad, ksize, axis=2), ksize, axis=3).reshape(
        shape)


def global_avg_pool_forward(x):
    """Average every channel over space, ``(B, C, H, W) -> (B, C)``."""
    return x.mean(axis=(2, 3)), x.shape


def global_avg_pool_backward(grad, shape):
    scale = 1. / (shape[2] * shape[3])
    return np.broadcast_to(grad[:, :, None, None] * scale, shape).copy()


def pixel_shuffle_forward(x, scale):
    """Rearrange ``(B, C s^2, H, W)`` into ``(B, C, s H, s W)``.

    ``out[b, c, s h + dy, s w + dx] = x[b, c s^2 + dy s + dx, h, w]``.
    """
    batch, channels, height, width = x.shape
    if channels % (scale * scale):
        raise ValueError(
            "Pixel shuffle by {} needs channels divisible by {}, got "
            "{}".format(scale, scale * scale, channels))
    out_channels = channels // (scale * scale)
    out = x.reshape(batch, out_channels, scale, scale, height, width)
    out = out.transpose(0, 1, 4, 2, 5, 3)
    return out.reshape(batch, out_channels, height * scale, width * scale)


def pixel_shuffle_backward(grad, scale):
    batch, channels, height, width = grad.shape
    height //= scale
    width //= scale
    out = grad.reshape(batch, channels, height, scale, width, scale)
    out = out.transpose(0, 1, 3, 5, 2, 4)
    return out.reshape(batch, channels * scale * scale, height, width)
