"""Degradation families, their DoT mapping and the degradation model.

An LR image is produced from an HR image by::

    x = bicubic_downsample(y (*) kernel, scale) + noise

Each family varies exactly one parameter between two primaries:

========  ===================================  ================
family    varying parameter                    fixed otherwise
========  ===================================  ================
noise     AWGN level (8-bit units)             blur sigma 0.2
blur      isotropic Gaussian sigma             no noise
angle     rotation of an anisotropic Gaussian  sigma_u, sigma_v
========  ===================================  ================
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..imaging import bicubic_resize
from ._kernels import (DEFAULT_KERNEL_SIZE, Kernel, anisotropic_kernel,
                       delta_kernel, gaussian_kernel)
from ._noise import synthesize_noise

logger = logging.getLogger(__name__)

FAMILIES = ('noise', 'blur', 'angle')

ADDITIVE_FAMILIES = ('noise', )
CONVOLUTIVE_FAMILIES = ('blur', 'angle')

NOISE_BOUNDS = (0., 30.)
BLUR_BOUNDS = {
    1: (0.2, 2.0),
    2: (0.2, 2.0),
    3: (0.2, 3.0),
    4: (0.2, 4.0),
}
ANGLE_BOUNDS = (0., math.pi / 2.)

DEFAULT_BASE_SIGMA = 0.2
ANGLE_SIGMA_U = 1.3
ANGLE_SIGMA_V = 3.25

_EVALUATION_LEVELS = {
    'noise': (0., 5., 10., 15., 20., 25., 30.),
    ('blur', 2): (0.2, 0.5, 1.0, 1.5, 2.0),
    ('blur', 4): (0.2, 1.0, 2.0, 3.0, 4.0),
    'angle': (0., math.pi / 6., math.pi / 4., math.pi / 3., math.pi / 2.),
}

# Tolerance for parameters that land on a bound after round-off.
_BOUND_TOL = 1e-9


def check_family(family):
    """Raise ValueError for unknown degradation families."""
    if family not in FAMILIES:
        raise ValueError(
            "Unknown degradation family {!r}, choose from {}".format(
                family, ', '.join(FAMILIES)))


def default_bounds(family, scale):
    """Return the default ``(param_min, param_max)`` of a family."""
    check_family(family)
    if family == 'noise':
        return NOISE_BOUNDS
    if family == 'angle':
        return ANGLE_BOUNDS
    if scale not in BLUR_BOUNDS:
        raise ValueError(
            "No default blur bounds for scale {}, set param_min and "
            "param_max".format(scale))
    return BLUR_BOUNDS[scale]


def evaluation_levels(family, scale, bounds=None):
    """Discrete parameter grid used for evaluation.

    The fixed grids belong to the default bounds. Other bounds, and families
    without a fixed grid for `scale`, use five equally spaced levels over
    `bounds`.
    """
    check_family(family)
    for key in (family, (family, scale)):
        if key in _EVALUATION_LEVELS:
            default = default_bounds(family, scale)
            if bounds is None or tuple(map(float, bounds)) == default:
                return _EVALUATION_LEVELS[key]
    low, high = bounds or default_bounds(family, scale)
    return tuple(float(level) for level in np.linspace(low, high, 5))


def sample_parameter(bounds, rng):
    """Draw a degradation parameter uniformly from `bounds`."""
    low, high = bounds
    if high == low:
        return float(low)
    return float(rng.uniform(low, high))


def parameter_at(bounds, tau):
    """Inverse of the DoT map: the parameter whose DoT is `tau`."""
    low, high = bounds
    return float(low + tau * (high - low))


def _check_parameter(param, bounds):
    low, high = bounds
    if high < low:
        raise ValueError("Invalid bounds ({}, {})".format(low, high))
    if not low - _BOUND_TOL <= param <= high + _BOUND_TOL:
        raise ValueError(
            "Degradation parameter {} outside bounds ({}, {})".format(
                param, low, high))


@dataclass(frozen=True)
class DegradationSpec:
    """Complete description of one synthetic degradation.

    Attributes
    ----------
    scale: int
        Downsampling factor.
    kernel: Kernel
        Blur kernel applied before downsampling.
    noise_level: float
        AWGN standard deviation in 8-bit units.
    family: str
        Active transitional family, one of :data:`FAMILIES`.
    param: float
        Value of the active family parameter.
    family_bounds: tuple of float
        ``(param_min, param_max)`` of the active family.
    """

    scale: int
    kernel: Kernel
    noise_level: float
    family: str
    param: float
    family_bounds: tuple

    def __post_init__(self):
        if int(self.scale) != self.scale or self.scale < 1:
            raise ValueError("Scale must be an integer >= 1, got {}".format(
                self.scale))
        if self.noise_level < 0:
            raise ValueError("Noise level must be nonnegative, got {}".format(
                self.noise_level))
        check_family(self.family)
        _check_parameter(self.param, self.family_bounds)

    @classmethod
    def for_family(cls,
                   family,
                   param,
                   scale=2,
                   bounds=None,
                   kernel_size=DEFAULT_KERNEL_SIZE,
                   base_sigma=DEFAULT_BASE_SIGMA,
                   noise_level=0.):
        """Build the degradation of `family` at parameter value `param`.

        Parameters
        ----------
        family: str
            ``noise``, ``blur`` or ``angle``.
        param: float
            Noise level, blur sigma or rotation angle respectively.
        scale: int
        bounds: tuple of float, optional
            Family bounds, :func:`default_bounds` when omitted.
        kernel_size: int
        base_sigma: float
            Fixed blur of the ``noise`` family, 0 for none.
        noise_level: float
            Fixed noise of the convolutive families.
        """
        check_family(family)
        if bounds is None:
            bounds = default_bounds(family, scale)
        bounds = (float(bounds[0]), float(bounds[1]))
        _check_parameter(param, bounds)
        if family == 'noise':
            kernel = (gaussian_kernel(base_sigma, kernel_size)
                      if base_sigma > 0 else delta_kernel(kernel_size))
            noise_level = param
        elif family == 'blur':
            kernel = (gaussian_kernel(param, kernel_size)
                      if param > 0 else delta_kernel(kernel_size))
        else:
            kernel = anisotropic_kernel(ANGLE_SIGMA_U, ANGLE_SIGMA_V, param,
                                        kernel_size)
        return cls(scale=int(scale),
                   kernel=kernel,
                   noise_level=float(noise_level),
                   family=family,
                   param=float(param),
                   family_bounds=bounds)

    @property
    def tau(self):
        """Ground-truth degree of transitionality."""
        return dot_ground_truth(self)


@dataclass(frozen=True)
class DegradationFamily:
    """Settings shared by all degradations of one transitional family.

    Attributes
    ----------
    family: str
    scale: int
    bounds: tuple of float
        ``(param_min, param_max)``.
    kernel_size: int
    base_sigma: float
        Fixed blur of the ``noise`` family.
    noise_level: float
        Fixed noise of the convolutive families.
    """

    family: str
    scale: int = 2
    bounds: tuple = None
    kernel_size: int = DEFAULT_KERNEL_SIZE
    base_sigma: float = DEFAULT_BASE_SIGMA
    noise_level: float = 0.

    def __post_init__(self):
        check_family(self.family)
        if self.bounds is None:
            object.__setattr__(self, 'bounds',
                               default_bounds(self.family, self.scale))
        low, high = self.bounds
        if high < low:
            raise ValueError("Invalid bounds ({}, {})".format(low, high))
        object.__setattr__(self, 'bounds', (float(low), float(high)))

    @classmethod
    def from_settings(cls, cfg):
        """Build from a configuration dictionary."""
        bounds = None
        if cfg.get('param_min') is not None and cfg.get(
                'param_max') is not None:
            bounds = (cfg['param_min'], cfg['param_max'])
        return cls(family=cfg['family'],
                   scale=cfg['scale'],
                   bounds=bounds,
                   kernel_size=cfg.get('kernel_size', DEFAULT_KERNEL_SIZE),
                   base_sigma=cfg.get('base_sigma', DEFAULT_BASE_SIGMA),
                   noise_level=cfg.get('noise_level', 0.))

    @property
    def transitional(self):
        """Whether the two primaries differ."""
        return self.bounds[1] > self.bounds[0]

    def spec(self, param):
        """Degradation at parameter value `param`."""
        return DegradationSpec.for_family(self.family,
                                          param,
                                          scale=self.scale,
                                          bounds=self.bounds,
                                          kernel_size=self.kernel_size,
                                          base_sigma=self.base_sigma,
                                          noise_level=self.noise_level)

    def spec_at(self, tau):
        """Degradation whose ground-truth DoT is `tau`."""
        return self.spec(parameter_at(self.bounds, tau))

    def sample(self, rng):
        """Degradation with a parameter drawn uniformly from the bounds."""
        return self.spec(sample_parameter(self.bounds, rng))

    def levels(self):
        """Discrete evaluation grid of the family."""
        return evaluation_levels(self.family, self.scale, self.bounds)


def dot_ground_truth(spec):
    """Map the active parameter of a degradation linearly onto ``[0, 1]``.

    ``tau = (param - param_min) / (param_max - param_min)``, so ``tau = 0`` is
    the weakest and ``tau = 1`` the strongest degradation of the family.
    Collapsed bounds give ``tau = 0``.

    Raises
    ------
    ValueError
        if the parameter lies outside the family bounds.
    """
    _check_parameter(spec.param, spec.family_bounds)
    low, high = spec.family_bounds
    if high == low:
        return 0.
    tau = (spec.param - low) / (high - low)
    return float(min(max(tau, 0.), 1.))


def blur(img, kernel):
    """Convolve every channel with `kernel` using mirror padding.

    This is a true convolution (the kernel is flipped).
    """
    img = np.asarray(img, dtype=np.float64)
    if kernel.family == 'delta':
        return img.copy()
    weights = kernel.values
    if img.ndim == 3:
        weights = weights[:, :, None]
    return ndimage.convolve(img, weights, mode='mirror')


def degrade(y, spec, rng=None):
    """Apply a degradation to an HR image.

    Parameters
    ----------
    y: numpy.ndarray
        ``H x W x C`` (or ``H x W``) HR image.
    spec: DegradationSpec
    rng: numpy.random.Generator, optional
        Needed when `spec` has a positive noise level.

    Returns
    -------
    numpy.ndarray
        The ``H/s x W/s`` LR image.

    Raises
    ------
    ValueError
        if the image size is not divisible by the scale or the kernel is
        larger than the image.
    """
    y = np.asarray(y, dtype=np.float64)
    height, width = y.shape[:2]
    if height % spec.scale or width % spec.scale:
        raise ValueError(
            "Image size {}x{} is not divisible by scale {}".format(
                height, width, spec.scale))
    if spec.kernel.size > min(height, width):
        raise ValueError(
            "Kernel of size {} is larger than the {}x{} image".format(
                spec.kernel.size, height, width))
    logger.debug("Degrading %sx%s image with %s, param %s", height, width,
                 spec.family, spec.param)
    x = blur(y, spec.kernel)
    if spec.scale > 1:
        x = bicubic_resize(x, 1. / spec.scale, antialias=True)
    if spec.noise_level > 0:
        if rng is None:
            raise ValueError("A random generator is needed to add noise")
        channels = x.shape[2] if x.ndim == 3 else None
        noise = synthesize_noise(x.shape[0], x.shape[1], channels,
                                 spec.noise_level, rng)
        x = x + noise.values
    return x
