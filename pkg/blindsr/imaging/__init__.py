"""Image I/O, resampling, cropping and quality metrics."""
from ._color import metric_channel, rgb_to_luminance
from ._io import (add_mean, load_image, mean_rgb, modcrop, quantize,
                  save_image, subtract_mean, to_images, to_tensor)
from ._metrics import PSNR_CAP, crop_border, psnr, quality, ssim
from ._patches import (PatchBox, augment, dihedral_transform, random_box,
                       random_crops, random_patch_pair)
from ._resize import bicubic_resize, cubic, resize_matrix

__all__ = [
    # File I/O
    'load_image',
    'save_image',
    'quantize',
    'modcrop',
    # Normalization
    'mean_rgb',
    'subtract_mean',
    'add_mean',
    'to_tensor',
    'to_images',
    # Resampling
    'bicubic_resize',
    'resize_matrix',
    'cubic',
    # Color
    'rgb_to_luminance',
    'metric_channel',
    # Metrics
    'PSNR_CAP',
    'crop_border',
    'psnr',
    'ssim',
    'quality',
    # Patches and augmentation
    'PatchBox',
    'random_box',
    'random_crops',
    'random_patch_pair',
    'dihedral_transform',
    'augment',
]
