"""End-to-end checks of the trained networks at desk scale.

Runs that train networks are marked ``slow`` and need ``pytest --slow``.
"""
import os

import numpy as np
import pytest
import yaml

from blindsr._config import read_config_file
from blindsr._experiment import run_experiment
from blindsr._random import child_rng
from blindsr.degradation import DegradationFamily, DegradationSpec, degrade
from blindsr.dotnet import (DoTNetConfig, dot_estimate, dot_statistics,
                            load_dotnet, train_dotnet)
from blindsr.imaging import psnr
from blindsr.tlsr import TLSRConfig, tlsr_infer, tlsr_train
from tests import smooth_image, textured_image, write_images

SET14 = os.environ.get('BLINDSR_SET14')


def _config(dirname, **settings):
    filename = os.path.join(dirname, 'config.yml')
    settings.setdefault('output_dir', os.path.join(dirname, 'output'))
    with open(filename, 'w') as file:
        yaml.safe_dump(settings, file)
    return read_config_file(filename, run_name='eval')


@pytest.fixture(scope='module')
def noise_experiment(tmp_path_factory):
    """Desk-size noise experiment at x2 with every evaluation method."""
    root = tmp_path_factory.mktemp('acceptance')
    data_dir = str(root / 'train')
    eval_dir = str(root / 'eval')
    write_images(data_dir, 20, 96, 96, seed=0)
    write_images(eval_dir, 6, 96, 96, seed=100)
    cfg = _config(str(root),
                  family='noise',
                  scale=2,
                  data_dir=data_dir,
                  eval_dir=eval_dir,
                  eval_method=['oracle', 'estimated', 'baseline'],
                  steps=5000,
                  dot_steps=2000)
    return cfg, run_experiment(cfg)


@pytest.mark.slow
def test_ablation_closes_the_gap(noise_experiment):
    _, report = noise_experiment
    results = report.overall
    tlsr = results['oracle']
    assert tlsr['psnr_gap_db'] < results['baseline0']['psnr_gap_db']
    for baseline in ('baseline0', 'baseline1'):
        assert tlsr['worst_psnr_db'] > results[baseline]['worst_psnr_db']


@pytest.mark.slow
def test_oracle_not_worse_than_estimated(noise_experiment):
    _, report = noise_experiment
    results = report.overall
    assert results['oracle']['psnr_db'] >= results['estimated']['psnr_db'] - .1


@pytest.mark.slow
def test_noise_dot_estimates_on_held_out_images(noise_experiment):
    cfg, _ = noise_experiment
    model, _ = load_dotnet(os.path.join(cfg['checkpoint_dir'], 'dotnet.npz'),
                           family='noise')
    images = [smooth_image(96, 96, seed) for seed in range(100, 106)]
    family = DegradationFamily('noise', scale=2)
    stats = dot_statistics(model, images, family, seed=5)
    assert stats.mae < 0.1
    assert stats.spearman > 0.9


@pytest.mark.slow
def test_blur_dot_estimates_on_held_out_images():
    family = DegradationFamily('blur', scale=2)
    images = [textured_image(128, 128, seed) for seed in range(20)]
    result = train_dotnet(images, family, DoTNetConfig(steps=2000), seed=0)
    held_out = [textured_image(96, 96, seed) for seed in range(100, 106)]
    stats = dot_statistics(result.model, held_out, family, seed=5)
    assert stats.mae < 0.1
    assert stats.spearman > 0.9


@pytest.mark.slow
def test_tlsr_overfits_small_dataset():
    config = TLSRConfig(family='noise', scale=2, steps=2000)
    family = config.degradations()
    images = [smooth_image(96, 96, seed) for seed in range(4)]
    result = tlsr_train(config, images, seed=0)
    spec = family.spec(family.bounds[0])
    for i, img in enumerate(images):
        lr = degrade(img, spec, child_rng(0, 'overfit', i))
        clean, _ = tlsr_infer(lr, result.model, tau=0.)
        strong, _ = tlsr_infer(lr, result.model, tau=1.)
        clean_psnr = psnr(clean, img, border=2)
        assert clean_psnr >= 30.
        assert clean_psnr >= psnr(strong, img, border=2)


@pytest.mark.slow
def test_denoise_dot_ignores_blur():
    """A clean but blurred image looks clean to the x1 noise estimator."""
    family = DegradationFamily('noise', scale=1)
    images = [smooth_image(96, 96, seed) for seed in range(20)]
    result = train_dotnet(images, family, DoTNetConfig(), seed=0)
    spec = DegradationSpec.for_family('blur', 2.0, scale=2)
    for i, seed in enumerate(range(200, 204)):
        lr = degrade(smooth_image(96, 96, seed), spec)
        tau = dot_estimate(lr, result.model, rng=child_rng(0, 'check', i))
        assert tau < 0.15


@pytest.mark.skipif(SET14 is None,
                    reason='set BLINDSR_SET14 to the Set14 directory')
def test_set14_bicubic_blur_x4(tmp_path):
    cfg = _config(str(tmp_path),
                  family='blur',
                  scale=4,
                  kernel_size=21,
                  noise_level=0.,
                  eval_dir=SET14,
                  eval_method='bicubic')
    report = run_experiment(cfg)
    levels = sorted({row['degradation_params'] for row in report.rows})
    assert levels == pytest.approx([0.2, 1., 2., 3., 4.])
    mean = np.mean([row['psnr_db'] for row in report.rows])
    assert mean == pytest.approx(24.68, abs=0.3)
