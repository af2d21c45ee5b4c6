"""Tests for metric tables and plots."""
import math

import numpy as np
import pytest

from blindsr._report import (KERNEL_CHECK_FIELDS, METRIC_FIELDS,
                             SUMMARY_FIELDS, kernel_transition_table,
                             overall, plot_report, read_metrics_csv,
                             read_table_csv, summarize, write_metrics_csv,
                             write_table_csv)


def metric_rows():
    rows = []
    rng = np.random.default_rng(0)
    for method in ('oracle', 'bicubic'):
        for level, tau in ((0., 0.), (15., 0.5), (30., 1.)):
            for image in ('baby', 'bird', 'woman'):
                rows.append({
                    'image_id': image,
                    'method': method,
                    'family': 'noise',
                    'degradation_params': level,
                    'tau': tau,
                    'tau_used': tau if method == 'oracle' else math.nan,
                    'psnr_db': 25. + rng.random() - level / 10.,
                    'ssim': 0.9 - level / 100. + 0.01 * rng.random(),
                })
    return rows


def test_metrics_csv_round_trip(tmp_path):
    rows = metric_rows()
    filename = write_metrics_csv(rows, str(tmp_path / 'out' /
                                           'metrics.csv'))
    with open(filename) as file:
        assert file.readline().strip() == ','.join(METRIC_FIELDS)
    loaded = read_metrics_csv(filename)
    assert len(loaded) == len(rows)
    for mine, theirs in zip(rows, loaded):
        for key in ('image_id', 'method', 'family', 'psnr_db', 'ssim'):
            assert theirs[key] == mine[key]
    assert math.isnan(loaded[-1]['tau_used'])


def test_summarize():
    summary = summarize(metric_rows())
    methods = [row['method'] for row in summary]
    assert methods == ['bicubic'] * 3 + ['oracle'] * 3
    assert [row['degradation_params'] for row in summary[:3]] == [0., 15., 30.]
    assert all(row['count'] == 3 for row in summary)
    assert set(summary[0]) == set(SUMMARY_FIELDS)
    bicubic = [row for row in metric_rows()
               if row['method'] == 'bicubic' and row['tau'] == 0.5]
    assert summary[1]['psnr_db'] == pytest.approx(
        np.mean([row['psnr_db'] for row in bicubic]))


def test_summarize_independent_of_row_order():
    rows = metric_rows()
    shuffled = [rows[i] for i in np.random.default_rng(1).permutation(
        len(rows))]
    assert summarize(shuffled) == summarize(rows)


def test_overall():
    result = overall(summarize(metric_rows()))
    assert list(result) == ['bicubic', 'oracle']
    oracle = result['oracle']
    assert oracle['worst_psnr_db'] <= oracle['psnr_db']
    assert oracle['psnr_gap_db'] == pytest.approx(3., abs=1.)


def test_summary_csv_types(tmp_path):
    filename = write_table_csv(summarize(metric_rows()),
                               str(tmp_path / 'summary.csv'), SUMMARY_FIELDS)
    loaded = read_table_csv(filename)
    assert isinstance(loaded[0]['count'], int)
    assert loaded == summarize(metric_rows())


def test_plot_report(tmp_path):
    filename = plot_report(summarize(metric_rows()),
                           str(tmp_path / 'plots' / 'psnr.svg'),
                           title='noise x2')
    with open(filename) as file:
        content = file.read()
    assert '<svg' in content


def test_kernel_transition_table():
    rows = kernel_transition_table()
    assert len(rows) == 3 * 11
    assert set(rows[0]) == set(KERNEL_CHECK_FIELDS)
    assert max(row['max_abs_deviation'] for row in rows) < 1e-6
    middle = [row for row in rows
              if row['sigma0'] == 0.2 and row['tau'] == 0.5][0]
    assert middle['sigma_tau'] == pytest.approx(1.1)
