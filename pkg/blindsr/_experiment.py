"""Experiment pipeline: ingest, train DoTNet, train SR networks, evaluate."""
import logging
import os
import time
from copy import deepcopy
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__
from ._config import snapshot
from ._config_checks import ConfigError
from ._data_finder import DatasetHandle, ingest_dataset
from ._random import child_rng
from ._report import (overall, plot_report, read_metrics_csv, summarize,
                      write_metrics_csv, write_table_csv, SUMMARY_FIELDS)
from ._task import BaseTask, get_flattened_tasks, run_tasks
from .degradation import DegradationFamily, degrade
from .dotnet import (DoTNetConfig, dot_statistics, hold_out, load_dotnet,
                     save_dotnet, train_dotnet)
from .imaging import quality, quantize
from .nn import CheckpointError
from .tlsr import (TLSRConfig, bicubic_upscale, check_pair, load_tlsr,
                   tlsr_infer, tlsr_train)

logger = logging.getLogger(__name__)

# Methods an evaluation row can carry; 'baseline' expands to both baselines.
ROW_METHODS = ('bicubic', 'oracle', 'estimated', 'baseline0', 'baseline1')


def expand_methods(methods):
    """Replace 'baseline' by the two single-primary baselines."""
    expanded = []
    for method in methods:
        names = ('baseline0', 'baseline1') if method == 'baseline' else (
            method, )
        for name in names:
            if name not in expanded:
                expanded.append(name)
    return expanded


def family_from_settings(cfg):
    return DegradationFamily.from_settings(cfg)


def write_history(history, filename):
    """Write ``(step, loss[, validation_mae])`` learning curves as CSV."""
    losses, maes = history
    maes = dict(maes)
    rows = [{
        'step': step,
        'loss': float(loss),
        'validation_mae': float(maes.get(step, np.nan)),
    } for step, loss in losses]
    return write_table_csv(rows, filename, ('step', 'loss', 'validation_mae'))


class IngestTask(BaseTask):
    """Crop and index a directory of HR images."""

    def __init__(self, source_dir, scale, cache_dir, name):
        super().__init__(name=name)
        self.source_dir = source_dir
        self.scale = scale
        self.cache_dir = cache_dir

    def _run(self, input_files):
        handle = ingest_dataset(self.source_dir, self.scale, self.cache_dir)
        return [handle.index_file]

    @property
    def handle(self):
        return DatasetHandle.load(self.output_files[0])


def data_task(cfg, key, name):
    """Ingest task for the image directory in setting `key`.

    Raises
    ------
    ConfigError
        if the setting is empty.
    """
    source = cfg.get(key)
    if source is None:
        raise ConfigError("Setting {} is needed for this run".format(key))
    return IngestTask(source, cfg['scale'],
                      os.path.join(cfg['work_dir'], 'data', name),
                      name='ingest_' + name)


class TrainDoTTask(BaseTask):
    """Train DoTNet on the training set of the experiment."""

    def __init__(self, settings, train_data, validation_data=None, name=''):
        ancestors = [train_data]
        if validation_data is not None:
            ancestors.append(validation_data)
        super().__init__(ancestors=ancestors, name=name)
        self.settings = settings
        self.train_data = train_data
        self.validation_data = validation_data

    def _run(self, input_files):
        cfg = self.settings
        family = family_from_settings(cfg)
        config = DoTNetConfig.from_settings(cfg)
        images = self.train_data.handle.images()
        if self.validation_data is not None:
            validation = self.validation_data.handle.images()
        else:
            images, validation = hold_out(images, cfg['seed'])
        result = train_dotnet(images,
                              family,
                              config,
                              seed=cfg['seed'],
                              validation_images=validation)
        checkpoint = os.path.join(cfg['checkpoint_dir'], 'dotnet.npz')
        result.save(checkpoint, config=snapshot(cfg))
        history = os.path.join(cfg['work_dir'], 'dotnet_history.csv')
        write_history((result.loss_history, result.mae_history), history)
        outputs = [checkpoint, history]
        if validation:
            stats = dot_statistics(result.model, validation, family,
                                   cfg['seed'], config)
            filename = os.path.join(cfg['work_dir'], 'dotnet_statistics.csv')
            write_table_csv(stats.rows, filename,
                            ('level', 'tau', 'mean', 'std', 'min', 'max',
                             'mae'))
            outputs.append(filename)
        return outputs


class TrainSRTask(BaseTask):
    """Train a TLSR network or one of the single-primary baselines."""

    def __init__(self, settings, train_mode, train_data, dot_task=None,
                 dot_checkpoint=None, name=''):
        ancestors = [train_data]
        if dot_task is not None:
            ancestors.append(dot_task)
        super().__init__(ancestors=ancestors, name=name)
        self.settings = dict(settings, train_mode=train_mode)
        if train_mode != 'transitional':
            self.settings['joint_dot'] = False
        self.train_data = train_data
        self.dot_task = dot_task
        self.dot_checkpoint = dot_checkpoint

    @property
    def checkpoint(self):
        return os.path.join(self.settings['checkpoint_dir'],
                            '{}.npz'.format(self.settings['train_mode']))

    @property
    def joint_dot_checkpoint(self):
        return os.path.join(self.settings['checkpoint_dir'],
                            'dotnet_joint.npz')

    def _run(self, input_files):
        cfg = self.settings
        config = TLSRConfig.from_settings(cfg)
        handle = self.train_data.handle
        dot_model = None
        if config.joint_dot:
            dot_file = (self.dot_task.output_files[0]
                        if self.dot_task is not None else self.dot_checkpoint)
            dot_model, _ = load_dotnet(dot_file, family=config.family)
        result = tlsr_train(config,
                            handle.images(),
                            seed=cfg['seed'],
                            mean=handle.mean,
                            dot_model=dot_model)
        result.save(self.checkpoint, config=snapshot(cfg))
        history = os.path.join(
            cfg['work_dir'], '{}_history.csv'.format(cfg['train_mode']))
        write_history((result.loss_history, []), history)
        outputs = [self.checkpoint, history]
        if config.joint_dot:
            save_dotnet(self.joint_dot_checkpoint,
                        dot_model,
                        config.degradations(),
                        step=result.step,
                        config=snapshot(cfg))
            outputs.append(self.joint_dot_checkpoint)
        return outputs


def evaluate(images, family, methods, seed, sr_model=None, dot_model=None,
             baselines=None, levels=None):
    """Evaluate restoration methods on a discrete degradation grid.

    Parameters
    ----------
    images: list of tuple(str, numpy.ndarray)
        ``(image_id, hr_image)`` pairs, sides divisible by the scale.
    family: blindsr.degradation.DegradationFamily
    methods: list of str
        Any of :data:`ROW_METHODS`.
    seed: int
    sr_model: blindsr.tlsr.TLSRNet, optional
        Transitional network, needed by 'oracle' and 'estimated'.
    dot_model: blindsr.dotnet.DoTNet, optional
        Needed by 'estimated'.
    baselines: dict, optional
        Baseline networks by method name.
    levels: sequence of float, optional
        Parameter grid, the family's evaluation grid by default.

    Returns
    -------
    list of dict
        One row per image, level and method. Outputs are quantized to
        8 bits before PSNR and SSIM are computed on the luminance channel
        with a border of `scale` pixels.
    """
    baselines = baselines or {}
    levels = family.levels() if levels is None else levels
    models = {'oracle': sr_model, 'estimated': sr_model}
    models.update(baselines)
    for method in methods:
        if method not in ROW_METHODS:
            raise ValueError("Unknown evaluation method {!r}".format(method))
        if method != 'bicubic':
            model = models.get(method)
            if model is None:
                raise ValueError(
                    "Evaluation method {!r} needs a trained network".format(
                        method))
            if model.family != family.family or model.scale != family.scale:
                raise CheckpointError(
                    "Network for {!r} was trained on {} x{}, evaluating "
                    "{} x{}".format(method, model.family, model.scale,
                                    family.family, family.scale))
    if 'estimated' in methods:
        if dot_model is None:
            raise ValueError("Evaluation method 'estimated' needs a DoTNet")
        check_pair(sr_model, dot_model)

    rows = []
    for j, level in enumerate(levels):
        spec = family.spec(level)
        for i, (name, hr) in enumerate(images):
            lr = degrade(hr, spec, child_rng(seed, 'eval', i, j))
            for method in methods:
                if method == 'bicubic':
                    out = bicubic_upscale(lr, family.scale)
                    tau_used = np.nan
                elif method == 'oracle':
                    out, tau_used = tlsr_infer(lr, sr_model, tau=spec.tau)
                elif method == 'estimated':
                    out, tau_used = tlsr_infer(
                        lr, sr_model, dot_model,
                        rng=child_rng(seed, 'eval-crops', i, j))
                else:
                    out, tau_used = tlsr_infer(lr, baselines[method])
                psnr_db, ssim = quality(quantize(out) / 255., hr,
                                        border=family.scale)
                rows.append({
                    'image_id': name,
                    'method': method,
                    'family': family.family,
                    'degradation_params': float(level),
                    'tau': spec.tau,
                    'tau_used': float(tau_used),
                    'psnr_db': psnr_db,
                    'ssim': ssim,
                })
        logger.info("Evaluated level %s of %s (%s images)", level,
                    family.family, len(images))
    return rows


class EvaluateTask(BaseTask):
    """Evaluate every configured method on the evaluation set."""

    def __init__(self, settings, eval_data, checkpoints, ancestors=None,
                 name=''):
        super().__init__(ancestors=[eval_data] + list(ancestors or []),
                         name=name)
        self.settings = settings
        self.eval_data = eval_data
        self.checkpoints = checkpoints

    def _checkpoint(self, key):
        source = self.checkpoints.get(key)
        if isinstance(source, BaseTask):
            return source.output_files[0]
        if isinstance(source, tuple):
            task, index = source
            return task.output_files[index]
        return source

    def _run(self, input_files):
        cfg = self.settings
        family = family_from_settings(cfg)
        methods = expand_methods(cfg['eval_method'])
        handle = self.eval_data.handle
        images = list(zip(handle.ids, handle.images(cfg['eval_images'])))

        start = time.perf_counter()
        sr_model = dot_model = None
        if 'oracle' in methods or 'estimated' in methods:
            sr_model, _ = load_tlsr(self._checkpoint('transitional'),
                                    family=family.family,
                                    scale=family.scale)
        if 'estimated' in methods:
            dot_model, _ = load_dotnet(self._checkpoint('dotnet'),
                                       family=family.family)
        baselines = {}
        for method in ('baseline0', 'baseline1'):
            if method in methods:
                baselines[method], _ = load_tlsr(self._checkpoint(method),
                                                 family=family.family,
                                                 scale=family.scale)
        # loading a trained network stands in for training it
        self.phase_times['train'] = time.perf_counter() - start
        rows = evaluate(images, family, methods, cfg['seed'], sr_model,
                        dot_model, baselines, cfg.get('eval_levels'))
        filename = os.path.join(cfg['work_dir'], 'metrics.csv')
        write_metrics_csv(rows, filename)
        return [filename]


@dataclass
class ExperimentReport:
    """Result of an experiment.

    Attributes
    ----------
    config: dict
        Settings the experiment ran with.
    rows: list of dict
        Per image, level and method metrics.
    summary: list of dict
        Mean PSNR and SSIM per method and level.
    timings: dict
        Wall-clock seconds per phase.
    seed: int
    """

    config: dict
    rows: list
    summary: list = None
    timings: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.summary is None:
            self.summary = summarize(self.rows)

    @property
    def overall(self):
        """Mean over levels, worst level and PSNR gap per method."""
        return overall(self.summary)

    def check_consistency(self, tolerance=1e-12):
        """Raise ValueError unless the summary re-aggregates from the rows."""
        again = summarize(self.rows)
        if len(again) != len(self.summary):
            raise ValueError("Summary has {} rows, rows give {}".format(
                len(self.summary), len(again)))
        for mine, theirs in zip(self.summary, again):
            for key in ('psnr_db', 'ssim'):
                if abs(mine[key] - theirs[key]) > tolerance:
                    raise ValueError(
                        "Summary {} of {} at {} does not match its "
                        "rows".format(key, mine['method'],
                                      mine['degradation_params']))

    def write(self, work_dir, plot_dir):
        """Write metrics, summary, report file and plot."""
        start = time.perf_counter()
        files = {
            'metrics': write_metrics_csv(
                self.rows, os.path.join(work_dir, 'metrics.csv')),
            'summary': write_table_csv(
                self.summary, os.path.join(work_dir, 'summary.csv'),
                SUMMARY_FIELDS),
            'plot': plot_report(
                self.summary, os.path.join(plot_dir, 'psnr_per_level.svg'),
                title='blindsr v{}'.format(__version__)),
        }
        self.timings['io'] = time.perf_counter() - start
        report = {
            'seed': self.seed,
            'timings': dict(self.timings),
            'overall': {
                method: dict(values)
                for method, values in self.overall.items()
            },
            'config': self.config,
        }
        files['report'] = os.path.join(work_dir, 'report.yml')
        with open(files['report'], 'w') as file:
            yaml.safe_dump(report, file, sort_keys=True)
        return files


def phase_timings(tasks):
    """Sum the wall-clock time of finished tasks per phase.

    The phase is the task name up to the first underscore, e.g. ``train``
    for ``train_dotnet`` and ``train_transitional``. Time a task reports in
    its ``phase_times`` is booked on those phases instead.
    """
    timings = {}
    for task in sorted(tasks, key=lambda t: t.name):
        if task.wall_time is None:
            continue
        own = task.wall_time
        for phase, seconds in task.phase_times.items():
            timings[phase] = timings.get(phase, 0.) + seconds
            own -= seconds
        phase = task.name.split('_')[0]
        timings[phase] = timings.get(phase, 0.) + max(own, 0.)
    return timings


class Experiment:
    """Task graph of one experiment."""

    def __init__(self, cfg):
        self._cfg = deepcopy(cfg)
        self.family = family_from_settings(self._cfg)
        self.methods = expand_methods(self._cfg['eval_method'])
        self.evaluation = self.initialize_tasks()

    def initialize_tasks(self):
        """Create the tasks needed for the configured evaluation."""
        cfg = self._cfg
        eval_data = data_task(cfg, 'eval_dir', 'eval')
        train_data = None
        ancestors = []
        checkpoints = {}

        def training_data():
            nonlocal train_data
            if train_data is None:
                train_data = data_task(cfg, 'data_dir', 'train')
            return train_data

        dot_task = None
        trains_joint = (cfg['joint_dot'] and not cfg['sr_checkpoint'] and (
            'oracle' in self.methods or 'estimated' in self.methods))
        needs_dot = 'estimated' in self.methods or trains_joint
        if needs_dot:
            if cfg['dot_checkpoint']:
                checkpoints['dotnet'] = cfg['dot_checkpoint']
            else:
                validation = None
                if cfg['validation_dir']:
                    validation = data_task(cfg, 'validation_dir',
                                           'validation')
                dot_task = TrainDoTTask(cfg, training_data(), validation,
                                        name='train_dotnet')
                checkpoints['dotnet'] = dot_task
                ancestors.append(dot_task)

        wanted = []
        if 'oracle' in self.methods or 'estimated' in self.methods:
            wanted.append(('transitional', 'sr_checkpoint'))
        for mode in ('baseline0', 'baseline1'):
            if mode in self.methods:
                wanted.append((mode, mode + '_checkpoint'))
        for mode, key in wanted:
            if cfg[key]:
                checkpoints[mode] = cfg[key]
                continue
            joint = mode == 'transitional' and cfg['joint_dot']
            task = TrainSRTask(cfg,
                               mode,
                               training_data(),
                               dot_task=dot_task if joint else None,
                               dot_checkpoint=cfg['dot_checkpoint'],
                               name='train_' + mode)
            checkpoints[mode] = task
            if joint:
                # evaluate with the DoTNet trained along
                checkpoints['dotnet'] = (task, 2)
            ancestors.append(task)

        return EvaluateTask(cfg, eval_data, checkpoints, ancestors,
                            name='eval')

    @property
    def tasks(self):
        return get_flattened_tasks([self.evaluation])

    def __str__(self):
        return '\n\n'.join(str(task) for task in sorted(
            self.tasks, key=lambda t: t.name))

    def run(self):
        """Run all tasks and collect the report."""
        logger.info("These tasks will be executed: %s",
                    ', '.join(sorted(t.name for t in self.tasks)))
        run_tasks([self.evaluation],
                  max_parallel_tasks=self._cfg['max_parallel_tasks'])
        rows = read_metrics_csv(self.evaluation.output_files[0])
        timings = phase_timings(self.tasks)
        return ExperimentReport(config=snapshot(self._cfg),
                                rows=rows,
                                timings=timings,
                                seed=self._cfg['seed'])


def run_experiment(cfg):
    """Run an experiment and write its report.

    Missing checkpoints are trained first from ``data_dir``; the evaluation
    set ``eval_dir`` is degraded on the discrete grid of the family.

    Parameters
    ----------
    cfg: dict
        Settings as returned by :func:`blindsr._config.read_config_file`.

    Returns
    -------
    ExperimentReport
    """
    experiment = Experiment(cfg)
    logger.debug("Experiment summary:\n%s", experiment)
    report = experiment.run()
    report.check_consistency()
    files = report.write(cfg['work_dir'], cfg['plot_dir'])
    for method, values in report.overall.items():
        logger.info("%-10s mean PSNR %.3f dB, mean SSIM %.4f, worst level "
                    "%.3f dB", method, values['psnr_db'], values['ssim'],
                    values['worst_psnr_db'])
    logger.info("Wrote report to %s", files['report'])
    return report
