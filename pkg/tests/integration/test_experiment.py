"""Integration tests for :mod:`blindsr._experiment`."""
import os

import numpy as np
import pytest

from blindsr._config import read_config_file
from blindsr._experiment import (ROW_METHODS, Experiment, ExperimentReport,
                                 evaluate, expand_methods, phase_timings,
                                 run_experiment)
from blindsr._task import BaseTask
from blindsr.degradation import DegradationFamily
from blindsr.nn import CheckpointError
from blindsr.tlsr import TLSRConfig, TLSRNet
from tests import TINY_SETTINGS, smooth_image


@pytest.fixture
def settings(tmp_path, image_dir, config_file):
    """Return a function reading a tiny experiment configuration."""

    def _read(output='output', **kwargs):
        values = dict(TINY_SETTINGS,
                      data_dir=image_dir,
                      eval_dir=image_dir,
                      output_dir=str(tmp_path / output))
        values.update(kwargs)
        return read_config_file(config_file(**values), run_name='eval')

    return _read


def task_names(experiment):
    return sorted(task.name for task in experiment.tasks)


def test_expand_methods():
    assert expand_methods(['bicubic', 'baseline']) == [
        'bicubic', 'baseline0', 'baseline1'
    ]
    assert expand_methods(['baseline0', 'baseline']) == [
        'baseline0', 'baseline1'
    ]
    assert set(expand_methods(['bicubic', 'oracle', 'estimated',
                               'baseline'])) == set(ROW_METHODS)


def test_experiment_tasks_bicubic(settings):
    experiment = Experiment(settings(eval_method=['bicubic']))
    assert task_names(experiment) == ['eval', 'ingest_eval']


def test_experiment_tasks_full(settings):
    cfg = settings(eval_method=['bicubic', 'oracle', 'estimated', 'baseline'])
    experiment = Experiment(cfg)
    assert task_names(experiment) == [
        'eval', 'ingest_eval', 'ingest_train', 'train_baseline0',
        'train_baseline1', 'train_dotnet', 'train_transitional'
    ]
    # one ingest task is shared by all training tasks
    train = [t for t in experiment.tasks if t.name.startswith('train_')]
    ingests = {id(a) for t in train for a in t.ancestors if
               a.name == 'ingest_train'}
    assert len(ingests) == 1
    assert 'train_dotnet' in str(experiment)


def test_experiment_tasks_with_checkpoints(settings, tmp_path):
    cfg = settings(eval_method=['oracle', 'estimated'],
                   sr_checkpoint=str(tmp_path / 'sr.npz'),
                   dot_checkpoint=str(tmp_path / 'dot.npz'))
    experiment = Experiment(cfg)
    assert task_names(experiment) == ['eval', 'ingest_eval']
    checkpoints = experiment.evaluation.checkpoints
    assert checkpoints['transitional'] == str(tmp_path / 'sr.npz')
    assert checkpoints['dotnet'] == str(tmp_path / 'dot.npz')


def test_experiment_tasks_joint(settings):
    cfg = settings(eval_method=['estimated'], joint_dot=True)
    experiment = Experiment(cfg)
    assert task_names(experiment) == [
        'eval', 'ingest_eval', 'ingest_train', 'train_dotnet',
        'train_transitional'
    ]
    task, index = experiment.evaluation.checkpoints['dotnet']
    assert task.name == 'train_transitional'
    assert index == 2


def test_experiment_with_validation(settings, image_dir):
    cfg = settings(eval_method=['estimated'], validation_dir=image_dir)
    assert 'ingest_validation' in task_names(Experiment(cfg))


def test_phase_timings():
    tasks = []
    for name, wall_time in (('train_dotnet', 2.), ('train_transitional', 3.),
                            ('eval', 1.5), ('ingest_train', None)):
        task = BaseTask(name=name)
        task.wall_time = wall_time
        tasks.append(task)
    tasks[2].phase_times = {'train': .5}
    assert phase_timings(tasks) == pytest.approx({'train': 5.5, 'eval': 1.})


def test_report_consistency():
    rows = [{
        'image_id': 'a',
        'method': 'bicubic',
        'family': 'noise',
        'degradation_params': 0.,
        'tau': 0.,
        'tau_used': np.nan,
        'psnr_db': 30.,
        'ssim': 0.9,
    }]
    report = ExperimentReport(config={}, rows=rows)
    report.check_consistency()
    report.summary[0]['psnr_db'] += 1.
    with pytest.raises(ValueError, match='does not match'):
        report.check_consistency()


class TestEvaluate:
    family = DegradationFamily('noise', scale=2, kernel_size=5)
    images = [('a', smooth_image(16, 16))]

    def model(self, **kwargs):
        settings = dict(trunk_blocks=1,
                        channels=4,
                        transitional_blocks=1,
                        kernel_size=5,
                        dtype='float64')
        settings.update(kwargs)
        return TLSRNet(TLSRConfig(**settings), np.random.default_rng(0))

    def test_unknown_method(self):
        with pytest.raises(ValueError, match='Unknown evaluation method'):
            evaluate(self.images, self.family, ['nearest'], 0)

    def test_needs_network(self):
        with pytest.raises(ValueError, match='needs a trained network'):
            evaluate(self.images, self.family, ['oracle'], 0)

    def test_needs_dotnet(self):
        with pytest.raises(ValueError, match='needs a DoTNet'):
            evaluate(self.images, self.family, ['estimated'], 0,
                     sr_model=self.model())

    def test_family_mismatch(self):
        with pytest.raises(CheckpointError, match='trained on'):
            evaluate(self.images, self.family, ['oracle'], 0,
                     sr_model=self.model(family='blur'))

    def test_oracle_rows(self):
        rows = evaluate(self.images,
                        self.family, ['bicubic', 'oracle'],
                        0,
                        sr_model=self.model(),
                        levels=[0., 15.])
        assert [(r['method'], r['degradation_params']) for r in rows] == [
            ('bicubic', 0.), ('oracle', 0.), ('bicubic', 15.),
            ('oracle', 15.)
        ]
        assert rows[3]['tau'] == pytest.approx(0.5)
        assert rows[3]['tau_used'] == pytest.approx(0.5)
        assert np.isnan(rows[2]['tau_used'])
        for row in rows:
            assert 0. < row['ssim'] <= 1.


def test_run_experiment(settings):
    cfg = settings(eval_method=['bicubic', 'oracle', 'estimated', 'baseline'])
    report = run_experiment(cfg)

    assert len(report.rows) == 2 * 2 * 5
    assert {row['method'] for row in report.rows} == set(ROW_METHODS)
    assert {row['image_id'] for row in report.rows} == {'img00', 'img01'}
    assert set(report.overall) == set(ROW_METHODS)
    for row in report.rows:
        if row['method'] == 'estimated':
            assert 0. <= row['tau_used'] <= 1.
        elif row['method'] == 'baseline1':
            assert row['tau_used'] == 1.
    for name in ('dotnet', 'transitional', 'baseline0', 'baseline1'):
        assert os.path.isfile(
            os.path.join(cfg['checkpoint_dir'], name + '.npz'))
    for name in ('metrics.csv', 'summary.csv', 'report.yml',
                 'dotnet_history.csv', 'transitional_history.csv'):
        assert os.path.isfile(os.path.join(cfg['work_dir'], name))
    assert set(report.timings) == {'ingest', 'train', 'eval', 'io'}
    assert all(seconds > 0. for seconds in report.timings.values())


def test_run_experiment_reproducible(settings):
    methods = ['oracle', 'estimated']
    first = run_experiment(settings('first', eval_method=methods))
    second = run_experiment(settings('second', eval_method=methods))
    assert first.rows == second.rows
    assert first.summary == second.summary
    third = run_experiment(settings('third', eval_method=methods, seed=1))
    assert first.rows != third.rows


def test_run_experiment_from_checkpoints(settings):
    trained = settings('trained', eval_method=['oracle'])
    run_experiment(trained)
    checkpoint = os.path.join(trained['checkpoint_dir'], 'transitional.npz')

    cfg = settings('loaded', eval_method=['oracle'], sr_checkpoint=checkpoint)
    assert task_names(Experiment(cfg)) == ['eval', 'ingest_eval']
    report = run_experiment(cfg)
    assert {'train', 'eval', 'io'} <= set(report.timings)
    for phase in ('train', 'eval', 'io'):
        assert report.timings[phase] > 0.
