"""blindsr - blind super-resolution by transitional learning.

Subcommands
-----------
degrade        apply a synthetic degradation to images
verify-prop1   compare transition kernels with Gaussians of blended width
               (alias verify-kernels)
train-dot      train the DoT estimator
train-tlsr     train a TLSR network or a single-primary baseline
eval           evaluate on the discrete degradation grid
sr             blind super-resolution of single images
sr-real        two-stage restoration: denoise, then deblur and upscale
report         summary CSV and SVG plot from a metrics CSV

Exit codes: 0 ok, 1 usage or configuration error, 2 data or checkpoint
error, 3 numerical failure.
"""
import argparse
import datetime
import logging
import os
import shutil
import sys

import yaml

from . import __version__
from ._config import configure_logging, read_config_file, snapshot
from ._config_checks import ConfigError
from ._data_finder import DataError, load_images
from ._experiment import (TrainDoTTask, TrainSRTask, data_task,
                          run_experiment)
from ._random import child_rng
from ._report import (KERNEL_CHECK_FIELDS, SUMMARY_FIELDS,
                      kernel_transition_table, overall, plot_report,
                      read_metrics_csv, summarize, write_table_csv)
from ._task import resource_usage_logger, run_tasks
from .degradation import (FAMILIES, DegradationSpec, degrade, save_kernel)
from .dotnet import load_dotnet
from .imaging import load_image, modcrop, save_image
from .nn import CheckpointError, NumericalError
from .tlsr import load_tlsr, tlsr_infer, tlsr_real

logger = logging.getLogger(__name__)

HEADER = r"""
______________________________________________________________________
     _     _ _           _
    | |__ | (_)_ __   __| |___ _ __
    | '_ \| | | '_ \ / _` / __| '__|
    | |_) | | | | | | (_| \__ \ |
    |_.__/|_|_|_| |_|\__,_|___/_|
______________________________________________________________________
""" + __doc__

# Largest kernel deviation accepted by verify-prop1.
KERNEL_CHECK_TOLERANCE = 1e-6

# Exceptions and the exit code they map to, most specific first.
EXIT_CODES = (
    (ConfigError, 1),
    (NumericalError, 3),
    (DataError, 2),
    (CheckpointError, 2),
    (OSError, 2),
    (ValueError, 2),
)


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser exiting with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, '{}: error: {}\n'.format(self.prog, message))


def get_parser():
    """Define the `blindsr` command line."""
    parser = _ArgumentParser(
        prog='blindsr',
        description=HEADER,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('-v',
                        '--version',
                        action='version',
                        version=__version__,
                        help="return blindsr's version number and exit")

    common = _ArgumentParser(add_help=False)
    common.add_argument('-c',
                        '--config',
                        help='Configuration file, the shipped defaults when '
                        'omitted')
    common.add_argument('--seed', type=int, help='Root random seed')
    common.add_argument('--out',
                        help='Output directory, a run directory is created '
                        'below it')
    common.add_argument('--log-level',
                        choices=('debug', 'info', 'warning', 'error'),
                        help='Console log level')

    family = _ArgumentParser(add_help=False)
    family.add_argument('--family',
                        choices=FAMILIES,
                        help='Degradation family')
    family.add_argument('--scale', type=int, help='Upscaling factor')

    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True

    sub = subparsers.add_parser(
        'degrade',
        parents=[common],
        help='apply a synthetic degradation to images')
    sub.add_argument('inputs', nargs='+', help='PNG files or directories')
    sub.add_argument('--scale', type=int, help='Downsampling factor')
    sub.add_argument('--sigma',
                     type=float,
                     help='Isotropic Gaussian blur width, no blur by default')
    sub.add_argument('--angle',
                     type=float,
                     help='Rotation of the anisotropic Gaussian in radians')
    sub.add_argument('--noise',
                     type=float,
                     default=0.,
                     help='Noise level in 8-bit units')
    sub.set_defaults(func=degrade_images)

    sub = subparsers.add_parser(
        'verify-prop1',
        aliases=['verify-kernels'],
        parents=[common],
        help='compare transition kernels with Gaussians of blended width')
    sub.set_defaults(func=verify_kernels)

    sub = subparsers.add_parser('train-dot',
                                parents=[common, family],
                                help='train the DoT estimator')
    sub.set_defaults(func=train_dot)

    sub = subparsers.add_parser(
        'train-tlsr',
        parents=[common, family],
        help='train a TLSR network or a single-primary baseline')
    sub.add_argument('--mode',
                     dest='train_mode',
                     choices=('transitional', 'baseline0', 'baseline1'),
                     help='What to train')
    sub.set_defaults(func=train_tlsr)

    sub = subparsers.add_parser(
        'eval',
        parents=[common, family],
        help='evaluate on the discrete degradation grid')
    sub.set_defaults(func=evaluate)

    sub = subparsers.add_parser('sr',
                                parents=[common, family],
                                help='blind super-resolution of images')
    sub.add_argument('inputs', nargs='+', help='PNG files or directories')
    sub.add_argument('--tau',
                     type=float,
                     help='Use this DoT instead of estimating it')
    sub.set_defaults(func=super_resolve)

    sub = subparsers.add_parser(
        'sr-real',
        parents=[common],
        help='two-stage restoration: denoise, then deblur and upscale')
    sub.add_argument('inputs', nargs='+', help='PNG files or directories')
    sub.add_argument('--denoise-checkpoint',
                     required=True,
                     help='TLSR checkpoint of the x1 noise family')
    sub.add_argument('--denoise-dot',
                     required=True,
                     help='DoTNet checkpoint of the noise family')
    sub.add_argument('--deblur-checkpoint',
                     required=True,
                     help='TLSR checkpoint of a convolutive family')
    sub.add_argument('--deblur-dot',
                     required=True,
                     help='DoTNet checkpoint of the same family')
    sub.set_defaults(func=super_resolve_real)

    sub = subparsers.add_parser(
        'report',
        parents=[common],
        help='summary CSV and SVG plot from metrics CSV files')
    sub.add_argument('metrics', nargs='+', help='metrics.csv files')
    sub.set_defaults(func=report)

    return parser


def _overrides(args):
    """Settings given on the command line."""
    keys = ('seed', 'log_level', 'family', 'scale', 'train_mode')
    overrides = {key: getattr(args, key, None) for key in keys}
    overrides['output_dir'] = args.out
    return overrides


def _input_images(paths):
    """Load ``(name, image)`` pairs from files and directories."""
    images = []
    for path in paths:
        if os.path.isdir(path):
            images.extend(load_images(path))
        elif os.path.isfile(path):
            name = os.path.splitext(os.path.basename(path))[0]
            images.append((name, load_image(path)))
        else:
            raise DataError("Input {} does not exist".format(path))
    return images


def _output_name(name, suffix=''):
    return name.replace('/', '__') + suffix + '.png'


def degrade_images(args, cfg):
    """Apply one degradation to every input image."""
    scale = cfg['scale']
    if args.angle is not None:
        spec = DegradationSpec.for_family('angle',
                                          args.angle,
                                          scale=scale,
                                          bounds=(args.angle, args.angle),
                                          kernel_size=cfg['kernel_size'],
                                          noise_level=args.noise)
    elif args.sigma is not None:
        spec = DegradationSpec.for_family('blur',
                                          args.sigma,
                                          scale=scale,
                                          bounds=(args.sigma, args.sigma),
                                          kernel_size=cfg['kernel_size'],
                                          noise_level=args.noise)
    else:
        spec = DegradationSpec.for_family('noise',
                                          args.noise,
                                          scale=scale,
                                          bounds=(args.noise, args.noise),
                                          kernel_size=cfg['kernel_size'],
                                          base_sigma=0.)
    logger.info("Degrading with %s kernel %s, scale %s, noise level %s",
                spec.kernel.family, spec.kernel.params, spec.scale,
                spec.noise_level)
    save_kernel(spec.kernel, os.path.join(cfg['work_dir'], 'kernel.txt'))
    for i, (name, img) in enumerate(_input_images(args.inputs)):
        cropped = modcrop(img, scale)
        if cropped.shape != img.shape:
            logger.info("Cropped %s from %s to %s", name, img.shape[:2],
                        cropped.shape[:2])
        lr = degrade(cropped, spec, child_rng(cfg['seed'], 'degrade', i))
        save_image(lr, os.path.join(cfg['work_dir'], _output_name(name)))
    logger.info("Wrote degraded images to %s", cfg['work_dir'])


def verify_kernels(args, cfg):
    """Write the kernel equivalence table and check its deviations."""
    rows = kernel_transition_table()
    filename = write_table_csv(
        rows, os.path.join(cfg['work_dir'], 'kernel_check.csv'),
        KERNEL_CHECK_FIELDS)
    worst = max(row['max_abs_deviation'] for row in rows)
    logger.info("Largest kernel deviation over %s rows: %.3e (%s)",
                len(rows), worst, filename)
    if not worst < KERNEL_CHECK_TOLERANCE:
        raise NumericalError(
            "Transition kernels deviate by {:.3e} from the blended "
            "Gaussians".format(worst))


def train_dot(args, cfg):
    """Train DoTNet on ``data_dir``."""
    validation = None
    if cfg['validation_dir']:
        validation = data_task(cfg, 'validation_dir', 'validation')
    task = TrainDoTTask(cfg,
                        data_task(cfg, 'data_dir', 'train'),
                        validation,
                        name='train_dotnet')
    run_tasks([task], max_parallel_tasks=1)
    logger.info("Wrote:\n%s", '\n'.join(task.output_files))


def train_tlsr(args, cfg):
    """Train a TLSR network on ``data_dir``."""
    train_data = data_task(cfg, 'data_dir', 'train')
    dot_task = None
    if cfg['joint_dot'] and not cfg['dot_checkpoint']:
        dot_task = TrainDoTTask(cfg, train_data, name='train_dotnet')
    task = TrainSRTask(cfg,
                       cfg['train_mode'],
                       train_data,
                       dot_task=dot_task,
                       dot_checkpoint=cfg['dot_checkpoint'],
                       name='train_' + cfg['train_mode'])
    run_tasks([task], max_parallel_tasks=1)
    logger.info("Wrote:\n%s", '\n'.join(task.output_files))


def evaluate(args, cfg):
    """Run the configured experiment."""
    run_experiment(cfg)


def _sr_pair(checkpoint, dot_checkpoint, family=None, scale=None):
    model, _ = load_tlsr(checkpoint, family=family, scale=scale)
    dot_model = None
    if dot_checkpoint:
        dot_model, _ = load_dotnet(dot_checkpoint, family=model.family)
    return model, dot_model


def super_resolve(args, cfg):
    """Blind super-resolution of every input image."""
    if not cfg['sr_checkpoint']:
        raise ConfigError("Setting sr_checkpoint is needed by sr")
    model, dot_model = _sr_pair(cfg['sr_checkpoint'], cfg['dot_checkpoint'],
                                args.family, args.scale)
    rows = []
    for i, (name, img) in enumerate(_input_images(args.inputs)):
        out, tau = tlsr_infer(img,
                              model,
                              dot_model,
                              rng=child_rng(cfg['seed'], 'sr', i),
                              tau=args.tau)
        save_image(
            out,
            os.path.join(cfg['work_dir'],
                         _output_name(name, '_x{}'.format(model.scale))))
        logger.info("Super-resolved %s with DoT %.4f", name, tau)
        rows.append({'image_id': name, 'tau_used': tau})
    write_table_csv(rows, os.path.join(cfg['work_dir'], 'dot.csv'),
                    ('image_id', 'tau_used'))


def super_resolve_real(args, cfg):
    """Denoise at x1, then deblur and upscale every input image."""
    denoise_pair = _sr_pair(args.denoise_checkpoint, args.denoise_dot)
    deblur_pair = _sr_pair(args.deblur_checkpoint, args.deblur_dot)
    rows = []
    for i, (name, img) in enumerate(_input_images(args.inputs)):
        out, (tau_noise, tau_blur) = tlsr_real(img,
                                               denoise_pair,
                                               deblur_pair,
                                               rng=child_rng(
                                                   cfg['seed'], 'sr-real',
                                                   i),
                                               return_taus=True)
        save_image(out, os.path.join(cfg['work_dir'], _output_name(name)))
        rows.append({
            'image_id': name,
            'tau_noise': tau_noise,
            'tau_blur': tau_blur
        })
    write_table_csv(rows, os.path.join(cfg['work_dir'], 'dot.csv'),
                    ('image_id', 'tau_noise', 'tau_blur'))


def report(args, cfg):
    """Summarize metrics files into a table and a plot."""
    rows = []
    for filename in args.metrics:
        if not os.path.isfile(filename):
            raise DataError("Metrics file {} does not exist".format(filename))
        rows.extend(read_metrics_csv(filename))
    if not rows:
        raise DataError("No metric rows in {}".format(', '.join(
            args.metrics)))
    summary = summarize(rows)
    write_table_csv(summary, os.path.join(cfg['work_dir'], 'summary.csv'),
                    SUMMARY_FIELDS)
    plot_report(summary, os.path.join(cfg['plot_dir'],
                                      'psnr_per_level.svg'))
    for method, values in overall(summary).items():
        logger.info("%-10s mean PSNR %.3f dB, mean SSIM %.4f", method,
                    values['psnr_db'], values['ssim'])


def main(args):
    """Define the `blindsr` program."""
    cfg = read_config_file(args.config,
                           run_name=args.command,
                           overrides=_overrides(args))
    for key in ('run_dir', 'work_dir', 'plot_dir', 'checkpoint_dir'):
        os.makedirs(cfg[key], exist_ok=True)

    log_files = configure_logging(output=cfg['run_dir'],
                                  console_log_level=cfg['log_level'])
    logger.info(HEADER)
    logger.info("Using config file %s", cfg['config_file'])
    logger.info("Writing program log files to:\n%s", "\n".join(log_files))

    # keep the settings of this run for future reference
    shutil.copy2(cfg['config_file'], cfg['run_dir'])
    with open(os.path.join(cfg['run_dir'], 'settings.yml'), 'w') as file:
        yaml.safe_dump(snapshot(cfg), file, sort_keys=True)

    timestamp1 = datetime.datetime.utcnow()
    timestamp_format = "%Y-%m-%d %H:%M:%S"
    logger.info("Starting blindsr %s v%s at time: %s UTC", args.command,
                __version__, timestamp1.strftime(timestamp_format))
    logger.info(70 * "-")
    logger.info("RUNDIR        = %s", cfg['run_dir'])
    logger.info("WORKDIR       = %s", cfg['work_dir'])
    logger.info("PLOTDIR       = %s", cfg['plot_dir'])
    logger.info("CHECKPOINTDIR = %s", cfg['checkpoint_dir'])
    logger.info(70 * "-")

    resource_log = os.path.join(cfg['run_dir'], 'resource_usage.txt')
    with resource_usage_logger(pid=os.getpid(), filename=resource_log):
        args.func(args, cfg)

    timestamp2 = datetime.datetime.utcnow()
    logger.info("Ending blindsr %s v%s at time: %s UTC", args.command,
                __version__, timestamp2.strftime(timestamp_format))
    logger.info("Time for running %s was: %s", args.command,
                timestamp2 - timestamp1)
    return cfg


def exit_code(exc):
    """Exit code of the program after `exc` was raised."""
    for exc_type, code in EXIT_CODES:
        if isinstance(exc, exc_type):
            return code
    return 1


def cli(argv=None):
    """Run the `blindsr` program and return its exit code."""
    parser = get_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        main(args)
    except Exception as exc:  # noqa
        if not logging.getLogger().handlers:
            # Add a logging handler if main failed to do so.
            logging.basicConfig()
        logger.exception(
            "Program terminated abnormally, see stack trace "
            "below for more information",
            exc_info=True)
        return exit_code(exc)
    logger.info("Run was successful")
    return 0


def run():
    """Run the `blindsr` program, logging any exceptions."""
    sys.exit(cli())
