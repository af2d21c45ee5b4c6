"""Blind super-resolution by transitional learning."""
import logging

from ._version import __version__

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

__all__ = [
    '__version__',
    'degradation',
    'imaging',
    'nn',
    'transitional',
    'dotnet',
    'tlsr',
]
