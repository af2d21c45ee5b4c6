"""blindsr configuration."""
import datetime
import logging
import logging.config
import os
import time

import yaml

from . import _config_checks as check
from ._config_checks import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = os.path.join(os.path.dirname(__file__),
                                   'config-default.yml')

DEFAULTS = {
    'family': 'noise',
    'scale': 2,
    'param_min': None,
    'param_max': None,
    'base_sigma': 0.2,
    'noise_level': 0.,
    'kernel_size': 21,
    'trunk_blocks': 4,
    'channels': 16,
    'transitional_blocks': 2,
    'padding': 'zero',
    'batch_size': 16,
    'lr_patch': 32,
    'learning_rate': 5e-4,
    'lr_halving_period': 2000,
    'steps': 5000,
    'train_mode': 'transitional',
    'joint_dot': False,
    'dot_patch_count': 8,
    'dot_patch_size': 32,
    'dot_channels': 16,
    'dot_reduced_channels': 8,
    'dot_fc_hidden': 32,
    'dot_batch_size': 8,
    'dot_crop': 48,
    'dot_learning_rate': 1e-3,
    'dot_steps': 2000,
    'dot_validate_every': 250,
    'dtype': 'float32',
    'seed': 0,
    'log_level': 'info',
    'max_parallel_tasks': 1,
    'data_dir': None,
    'validation_dir': None,
    'eval_dir': None,
    'output_dir': './blindsr_output',
    'dot_checkpoint': None,
    'sr_checkpoint': None,
    'baseline0_checkpoint': None,
    'baseline1_checkpoint': None,
    'eval_method': ['bicubic', 'oracle', 'estimated'],
    'eval_levels': None,
    'eval_images': None,
}

PATH_KEYS = (
    'data_dir',
    'validation_dir',
    'eval_dir',
    'output_dir',
    'dot_checkpoint',
    'sr_checkpoint',
    'baseline0_checkpoint',
    'baseline1_checkpoint',
)


def read_config_file(config_file=None, run_name='blindsr', overrides=None):
    """Read a configuration file and store settings in a dictionary.

    Parameters
    ----------
    config_file: str, optional
        Flat YAML file, the shipped defaults when omitted.
    run_name: str
        Prefix of the run directory created below ``output_dir``.
    overrides: dict, optional
        Settings that take precedence over the file, e.g. from command line
        flags. None values are ignored.

    Returns
    -------
    dict
        The complete settings including the run directories.

    Raises
    ------
    ConfigError
        if the file is missing or its content is invalid.
    """
    if config_file is None:
        config_file = DEFAULT_CONFIG_FILE
    config_file = _normalize_path(config_file)
    if not os.path.isfile(config_file):
        raise ConfigError(
            "Configuration file {} does not exist".format(config_file))
    with open(config_file, 'r') as file:
        cfg = yaml.safe_load(file)
    if cfg is None:
        cfg = {}
    elif not isinstance(cfg, dict):
        raise ConfigError(
            "Configuration file {} must contain a mapping".format(config_file))
    else:
        check.config_with_schema(config_file)
    unknown = sorted(set(cfg) - set(DEFAULTS))
    if unknown:
        raise ConfigError("Unknown settings in {}: {}".format(
            config_file, ', '.join(unknown)))

    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = value

    for key in DEFAULTS:
        if key not in cfg:
            logger.info(
                "No %s specification in config file, "
                "defaulting to %s", key, DEFAULTS[key])
            cfg[key] = DEFAULTS[key]

    check.settings(cfg)

    for key in PATH_KEYS:
        cfg[key] = _normalize_path(cfg[key])
    cfg['config_file'] = config_file

    # insert a directory run_name_date_time in the output paths
    now = datetime.datetime.utcnow().strftime("%Y%m%d_%H%M%S")
    cfg['output_dir'] = os.path.join(cfg['output_dir'],
                                     '_'.join((run_name, now)))

    # create subdirectories
    cfg['run_dir'] = os.path.join(cfg['output_dir'], 'run')
    cfg['work_dir'] = os.path.join(cfg['output_dir'], 'work')
    cfg['plot_dir'] = os.path.join(cfg['output_dir'], 'plots')
    cfg['checkpoint_dir'] = os.path.join(cfg['output_dir'], 'checkpoints')

    return cfg


def _normalize_path(path):
    """Normalize paths.

    Expand ~ character and environment variables and convert path to absolute.

    Parameters
    ----------
    path: str
        Original path

    Returns
    -------
    str:
        Normalized path
    """
    if path is None:
        return None
    return os.path.abspath(os.path.expanduser(os.path.expandvars(path)))


def snapshot(cfg):
    """Settings without the run specific directories, for checkpoints."""
    derived = ('config_file', 'run_dir', 'work_dir', 'plot_dir',
               'checkpoint_dir', 'output_dir')
    return {key: value for key, value in cfg.items() if key not in derived}


def configure_logging(cfg_file=None, output=None, console_log_level=None):
    """Set up logging."""
    if cfg_file is None:
        cfg_file = os.path.join(os.path.dirname(__file__),
                                'config-logging.yml')

    if output is None:
        output = os.getcwd()

    cfg_file = os.path.abspath(cfg_file)
    with open(cfg_file) as file_handler:
        cfg = yaml.safe_load(file_handler)

    log_files = []
    for handler in cfg['handlers'].values():
        if 'filename' in handler:
            if not os.path.isabs(handler['filename']):
                handler['filename'] = os.path.join(output, handler['filename'])
            log_files.append(handler['filename'])
        if console_log_level is not None and 'stream' in handler:
            if handler['stream'] in ('ext://sys.stdout', 'ext://sys.stderr'):
                handler['level'] = console_log_level.upper()

    logging.config.dictConfig(cfg)
    logging.Formatter.converter = time.gmtime
    logging.captureWarnings(True)

    return log_files
