"""Synthetic degradations and their analytic transition states."""
from ._degrade import (ADDITIVE_FAMILIES, CONVOLUTIVE_FAMILIES, FAMILIES,
                       DegradationFamily, DegradationSpec, blur,
                       check_family, default_bounds,
                       degrade, dot_ground_truth, evaluation_levels,
                       parameter_at, sample_parameter)
from ._kernels import (DEFAULT_KERNEL_SIZE, Kernel, anisotropic_kernel,
                       delta_kernel, gaussian_kernel, kernel_second_moment,
                       load_kernel, save_kernel, transition_kernel,
                       transition_sigma)
from ._noise import (NoiseField, additive_transition,
                     canonical_additive_transition, synthesize_noise)

__all__ = [
    # Kernels
    'Kernel',
    'DEFAULT_KERNEL_SIZE',
    'gaussian_kernel',
    'anisotropic_kernel',
    'delta_kernel',
    'transition_kernel',
    'transition_sigma',
    'kernel_second_moment',
    'save_kernel',
    'load_kernel',
    # Noise
    'NoiseField',
    'synthesize_noise',
    'additive_transition',
    'canonical_additive_transition',
    # Families
    'FAMILIES',
    'ADDITIVE_FAMILIES',
    'CONVOLUTIVE_FAMILIES',
    'check_family',
    'default_bounds',
    'evaluation_levels',
    'sample_parameter',
    'parameter_at',
    # Degradation model
    'DegradationSpec',
    'DegradationFamily',
    'dot_ground_truth',
    'blur',
    'degrade',
]
