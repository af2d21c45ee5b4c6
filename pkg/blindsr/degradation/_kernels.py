"""Blur kernels and their analytic transition states.

Kernels live on a centered integer grid ``-r..r`` with ``r = size // 2``.
Rows index the vertical offset ``i``, columns the horizontal offset ``j``.
"""
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

KERNEL_FAMILIES = (
    'isotropic-gaussian',
    'anisotropic-gaussian',
    'delta',
)

DEFAULT_KERNEL_SIZE = 21

# Stand-in for sigma = 0, the blur-free primary.
BLUR_FREE_SIGMA = 1e-6


@dataclass(frozen=True, eq=False)
class Kernel:
    """Normalized 2-D blur kernel together with its generating parameters.

    Attributes
    ----------
    values: numpy.ndarray
        Nonnegative ``size x size`` array summing to one.
    family: str
        One of :data:`KERNEL_FAMILIES`.
    params: tuple of float
        ``(sigma,)`` for isotropic kernels, ``(sigma_u, sigma_v, theta)``
        for anisotropic kernels and ``()`` for the delta kernel.
    """

    values: np.ndarray
    family: str
    params: tuple = ()

    @property
    def size(self):
        """Width (and height) of the kernel."""
        return self.values.shape[0]

    def __repr__(self):
        return "Kernel(family={!r}, params={!r}, size={})".format(
            self.family, self.params, self.size)


def _check_size(size):
    if int(size) != size or size < 1 or size % 2 == 0:
        raise ValueError(
            "Kernel size must be a positive odd integer, got {}".format(size))
    return int(size)


def _grid(size):
    """Return the (i, j) offset grids of a size x size kernel."""
    radius = size // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    return np.meshgrid(offsets, offsets, indexing='ij')


def _from_log(log_values):
    """Exponentiate log-domain kernel values and normalize them."""
    values = np.exp(log_values - log_values.max())
    return values / values.sum()


def _gaussian_log(sigma, size):
    """Log of the isotropic Gaussian pdf on the kernel grid."""
    i, j = _grid(size)
    return -(i**2 + j**2) / (2. * sigma**2) - np.log(2. * np.pi * sigma**2)


def delta_kernel(size=DEFAULT_KERNEL_SIZE):
    """Return the identity (no blur) kernel."""
    size = _check_size(size)
    values = np.zeros((size, size))
    values[size // 2, size // 2] = 1.
    return Kernel(values, 'delta', ())


def gaussian_kernel(sigma, size=DEFAULT_KERNEL_SIZE):
    """Isotropic Gaussian blur kernel.

    Parameters
    ----------
    sigma: float
        Standard deviation in pixels, must be positive.
    size: int
        Odd kernel width.

    Returns
    -------
    Kernel
        ``values[i, j]`` proportional to
        ``exp(-(i**2 + j**2) / (2 sigma**2))``,
        renormalized after truncation to the grid.

    Raises
    ------
    ValueError
        if `sigma` is not positive or `size` is not a positive odd integer.
    """
    if not sigma > 0:
        raise ValueError(
            "Gaussian kernel sigma must be positive, got {}".format(sigma))
    size = _check_size(size)
    return Kernel(_from_log(_gaussian_log(sigma, size)), 'isotropic-gaussian',
                  (float(sigma), ))


def anisotropic_kernel(sigma_u, sigma_v, theta, size=DEFAULT_KERNEL_SIZE):
    """Anisotropic Gaussian blur kernel.

    The covariance is ``R(theta) diag(sigma_u**2, sigma_v**2) R(theta)^T``
    and the quadratic form is evaluated at ``p = (j, i)``, i.e. the first
    principal axis points along the columns for ``theta = 0``.

    Parameters
    ----------
    sigma_u: float
        Standard deviation along the first principal axis.
    sigma_v: float
        Standard deviation along the second principal axis.
    theta: float
        Rotation angle in radians.
    size: int
        Odd kernel width.

    Returns
    -------
    Kernel
    """
    if not (sigma_u > 0 and sigma_v > 0):
        raise ValueError(
            "Anisotropic kernel needs positive sigma_u and sigma_v, got "
            "{} and {}".format(sigma_u, sigma_v))
    size = _check_size(size)
    cos, sin = np.cos(theta), np.sin(theta)
    rotation = np.array([[cos, -sin], [sin, cos]])
    covariance = rotation @ np.diag([sigma_u**2, sigma_v**2]) @ rotation.T
    precision = np.linalg.inv(covariance)
    i, j = _grid(size)
    quadratic = (precision[0, 0] * j**2 + 2. * precision[0, 1] * i * j +
                 precision[1, 1] * i**2)
    return Kernel(_from_log(-0.5 * quadratic), 'anisotropic-gaussian',
                  (float(sigma_u), float(sigma_v), float(theta)))


def transition_sigma(sigma0, sigma1, tau):
    """Standard deviation of the transition state, linear in `tau`."""
    return (1. - tau) * sigma0 + tau * sigma1


def transition_kernel(sigma0, sigma1, tau, size=DEFAULT_KERNEL_SIZE):
    """Transition state between two isotropic Gaussian primaries.

    The kernel is assembled from the primaries alone::

        B_tau(i, j) ~ B0(i, j)**(sigma0**2 / (2 s**2))
                      * B1(i, j)**(sigma1**2 / (2 s**2))

    with ``s = (1 - tau) sigma0 + tau sigma1``. The product is formed in
    the log domain and normalized numerically, which absorbs every constant
    independent of ``(i, j)``. ``sigma0 == 0`` stands for the blur-free
    primary and is evaluated at :data:`BLUR_FREE_SIGMA`.

    Parameters
    ----------
    sigma0: float
        Standard deviation of the weak primary, ``>= 0``.
    sigma1: float
        Standard deviation of the strong primary, ``> sigma0``.
    tau: float
        Degree of transitionality in ``[0, 1]``.
    size: int
        Odd kernel width.

    Returns
    -------
    Kernel
        An isotropic kernel whose parameter is the transition sigma.

    Raises
    ------
    ValueError
        if `tau` is outside ``[0, 1]`` or ``sigma1 <= sigma0``.
    """
    if not 0. <= tau <= 1.:
        raise ValueError("tau must lie in [0, 1], got {}".format(tau))
    if sigma0 < 0 or not sigma1 > sigma0:
        raise ValueError(
            "Transition kernels need 0 <= sigma0 < sigma1, got sigma0={} "
            "and sigma1={}".format(sigma0, sigma1))
    size = _check_size(size)
    sigma0 = max(float(sigma0), BLUR_FREE_SIGMA)
    sigma_tau = transition_sigma(sigma0, sigma1, tau)
    weight0 = sigma0**2 / (2. * sigma_tau**2)
    weight1 = sigma1**2 / (2. * sigma_tau**2)
    log_values = (weight0 * _gaussian_log(sigma0, size) +
                  weight1 * _gaussian_log(sigma1, size))
    return Kernel(_from_log(log_values), 'isotropic-gaussian',
                  (float(sigma_tau), ))


def kernel_second_moment(kernel):
    """Return the radial second moment ``sum((i**2 + j**2) k(i, j))``."""
    i, j = _grid(kernel.size)
    return float(np.sum((i**2 + j**2) * kernel.values))


def save_kernel(kernel, filename):
    """Write a kernel as a plain-text matrix.

    The first line is ``size family param...``; the following `size` lines
    hold the rows, space separated, with enough digits to round-trip.
    """
    header = ' '.join([str(kernel.size), kernel.family] +
                      ['{!r}'.format(float(p)) for p in kernel.params])
    logger.debug("Writing kernel %s to %s", kernel, filename)
    with open(filename, 'w') as file:
        file.write(header + '\n')
        for row in kernel.values:
            file.write(' '.join('{!r}'.format(float(v)) for v in row) + '\n')


def load_kernel(filename):
    """Read a kernel written by :func:`save_kernel`."""
    with open(filename, 'r') as file:
        lines = [line.split() for line in file if line.strip()]
    if not lines or len(lines[0]) < 2:
        raise ValueError("Missing kernel header in {}".format(filename))
    size = _check_size(int(lines[0][0]))
    family = lines[0][1]
    if family not in KERNEL_FAMILIES:
        raise ValueError("Unknown kernel family {!r} in {}".format(
            family, filename))
    params = tuple(float(p) for p in lines[0][2:])
    values = np.array(lines[1:], dtype=np.float64)
    if values.shape != (size, size):
        raise ValueError(
            "Kernel in {} has shape {}, header says {}x{}".format(
                filename, values.shape, size, size))
    return Kernel(values, family, params)
