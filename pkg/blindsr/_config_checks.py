"""Module with functions to check a configuration."""
import logging
import os

import yamale

from .degradation import CONVOLUTIVE_FAMILIES, DegradationFamily

logger = logging.getLogger(__name__)

EVAL_METHODS = ('bicubic', 'oracle', 'estimated', 'baseline')


class ConfigError(Exception):
    """Configuration contains an error."""


def config_with_schema(filename):
    """Check if the configuration file content matches the schema."""
    schema_file = os.path.join(os.path.dirname(__file__), 'config_schema.yml')
    logger.debug("Checking configuration against schema %s", schema_file)
    config = yamale.make_data(filename)
    schema = yamale.make_schema(schema_file)
    try:
        yamale.validate(schema, config)
    except ValueError as exc:
        raise ConfigError("Configuration file {} is invalid:\n{}".format(
            filename, exc)) from exc


def degradation_family(cfg):
    """Check the degradation settings and return the family they describe."""
    low, high = cfg.get('param_min'), cfg.get('param_max')
    if (low is None) != (high is None):
        raise ConfigError("Set both param_min and param_max, or neither")
    try:
        family = DegradationFamily.from_settings(cfg)
    except ValueError as exc:
        raise ConfigError(
            "Invalid degradation settings: {}".format(exc)) from exc
    if family.kernel_size % 2 == 0:
        raise ConfigError("kernel_size must be odd, got {}".format(
            family.kernel_size))
    return family


def training(cfg, family):
    """Check the SR and DoT training settings against the family."""
    if cfg['train_mode'] == 'transitional' and not family.transitional:
        raise ConfigError(
            "Transitional training needs param_max > param_min, got bounds "
            "{}".format(family.bounds))
    if cfg['joint_dot'] and cfg['train_mode'] != 'transitional':
        raise ConfigError("joint_dot needs train_mode 'transitional'")
    if (family.family in CONVOLUTIVE_FAMILIES
            and cfg['dot_patch_size'] < family.kernel_size):
        raise ConfigError(
            "dot_patch_size {} is smaller than the blur kernel size {}".format(
                cfg['dot_patch_size'], family.kernel_size))
    if cfg['dot_crop'] < cfg['dot_patch_size']:
        raise ConfigError("dot_crop {} is smaller than dot_patch_size "
                          "{}".format(cfg['dot_crop'], cfg['dot_patch_size']))


def eval_methods(methods):
    """Check the evaluation methods and return them as a list."""
    if isinstance(methods, str):
        methods = [methods]
    unknown = sorted(set(methods) - set(EVAL_METHODS))
    if unknown:
        raise ConfigError("Unknown eval_method {}, choose from {}".format(
            ', '.join(unknown), ', '.join(EVAL_METHODS)))
    if not methods:
        raise ConfigError("eval_method must name at least one method")
    return list(methods)


def eval_levels(levels, family):
    """Check that all evaluation levels lie inside the family bounds."""
    if levels is None:
        return
    low, high = family.bounds
    outside = [level for level in levels if not low <= level <= high]
    if outside:
        raise ConfigError(
            "eval_levels {} lie outside the bounds ({}, {})".format(
                outside, low, high))


def settings(cfg):
    """Run all semantic checks a schema cannot express."""
    family = degradation_family(cfg)
    training(cfg, family)
    cfg['eval_method'] = eval_methods(cfg['eval_method'])
    eval_levels(cfg.get('eval_levels'), family)
    return family
