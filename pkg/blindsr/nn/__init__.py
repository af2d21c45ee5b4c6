"""Minimal numpy layer, loss and optimizer kit with explicit backward."""
from ._checkpoint import (CHECKPOINT_VERSION, Checkpoint, CheckpointError,
                          load_checkpoint, save_checkpoint)
from ._functional import (avg_pool_backward, avg_pool_forward,
                          conv2d_backward, conv2d_forward,
                          global_avg_pool_backward, global_avg_pool_forward,
                          linear_backward, linear_forward,
                          pixel_shuffle_backward, pixel_shuffle_forward,
                          relu_backward, relu_forward, sigmoid_backward,
                          sigmoid_forward)
from ._gradcheck import grad_check
from ._layers import (AvgPool2d, BottleneckBlock, Conv2d, GlobalAvgPool2d,
                      LayerParams, Linear, Module, Parameter, PixelShuffle,
                      ReLU, ResidualBlock, Sequential, Sigmoid, kaiming_normal)
from ._losses import NumericalError, check_finite, l1_loss
from ._optim import Adam, AdamState, adam_step, halved_learning_rate

__all__ = [
    # Array operations
    'conv2d_forward',
    'conv2d_backward',
    'linear_forward',
    'linear_backward',
    'relu_forward',
    'relu_backward',
    'sigmoid_forward',
    'sigmoid_backward',
    'avg_pool_forward',
    'avg_pool_backward',
    'global_avg_pool_forward',
    'global_avg_pool_backward',
    'pixel_shuffle_forward',
    'pixel_shuffle_backward',
    # Layers
    'Parameter',
    'LayerParams',
    'Module',
    'kaiming_normal',
    'Conv2d',
    'Linear',
    'ReLU',
    'Sigmoid',
    'AvgPool2d',
    'GlobalAvgPool2d',
    'PixelShuffle',
    'Sequential',
    'ResidualBlock',
    'BottleneckBlock',
    # Losses
    'l1_loss',
    'NumericalError',
    'check_finite',
    # Optimization
    'Adam',
    'AdamState',
    'adam_step',
    'halved_learning_rate',
    # Testing
    'grad_check',
    # Persistence
    'CHECKPOINT_VERSION',
    'Checkpoint',
    'CheckpointError',
    'save_checkpoint',
    'load_checkpoint',
]
