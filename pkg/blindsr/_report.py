"""Metric tables, CSV files and plots of experiment results."""
import csv
import logging
import os
from collections import OrderedDict

import numpy as np

from .degradation import transition_kernel

logger = logging.getLogger(__name__)

METRIC_FIELDS = (
    'image_id',
    'method',
    'family',
    'degradation_params',
    'tau',
    'tau_used',
    'psnr_db',
    'ssim',
)

SUMMARY_FIELDS = (
    'method',
    'family',
    'degradation_params',
    'tau',
    'count',
    'psnr_db',
    'ssim',
)

KERNEL_CHECK_FIELDS = ('sigma0', 'sigma1', 'tau', 'sigma_tau',
                       'max_abs_deviation')

KERNEL_CHECK_SIGMAS = ((0.2, 2.0), (0.5, 4.0), (1.0, 3.0))
KERNEL_CHECK_TAUS = tuple(i / 10. for i in range(11))

_STRING_FIELDS = ('image_id', 'method', 'family')
_INT_FIELDS = ('count', 'step')


def _format(value):
    """Exact text form of a table value."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table_csv(rows, filename, fieldnames):
    """Write dictionaries as CSV rows, floats in their exact repr form."""
    dirname = os.path.dirname(filename)
    if dirname:
        os.makedirs(dirname, exist_ok=True)
    with open(filename, 'w', newline='') as file:
        writer = csv.DictWriter(file, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _format(row[key]) for key in fieldnames})
    logger.debug("Wrote %s rows to %s", len(rows), filename)
    return filename


def read_table_csv(filename):
    """Read a CSV written by :func:`write_table_csv`."""
    rows = []
    with open(filename, 'r', newline='') as file:
        for row in csv.DictReader(file):
            parsed = {}
            for key, value in row.items():
                if key in _STRING_FIELDS:
                    parsed[key] = value
                elif key in _INT_FIELDS:
                    parsed[key] = int(value)
                else:
                    parsed[key] = float(value)
            rows.append(parsed)
    return rows


def write_metrics_csv(rows, filename):
    """Write per-image metric rows.

    Columns: ``image_id, method, family, degradation_params, tau, tau_used,
    psnr_db, ssim``.
    """
    return write_table_csv(rows, filename, METRIC_FIELDS)


def read_metrics_csv(filename):
    return read_table_csv(filename)


def summarize(rows):
    """Mean PSNR and SSIM per method and degradation level.

    Returns
    -------
    list of dict
        Rows with :data:`SUMMARY_FIELDS`, sorted by method and level.
    """
    groups = OrderedDict()
    for row in rows:
        key = (row['method'], row['family'], float(row['degradation_params']))
        groups.setdefault(key, []).append(row)
    summary = []
    for (method, family, level) in sorted(groups):
        members = groups[(method, family, level)]
        summary.append({
            'method': method,
            'family': family,
            'degradation_params': level,
            'tau': float(members[0]['tau']),
            'count': len(members),
            'psnr_db': _ordered_mean(row['psnr_db'] for row in members),
            'ssim': _ordered_mean(row['ssim'] for row in members),
        })
    return summary


def _ordered_mean(values):
    """Mean with a fixed summation order, independent of row order."""
    values = np.sort(np.fromiter(values, dtype=np.float64))
    return float(np.sum(values) / values.size)


def overall(summary):
    """Mean over levels per method, the convention of benchmark tables."""
    methods = OrderedDict()
    for row in summary:
        methods.setdefault(row['method'], []).append(row)
    return OrderedDict(
        (method, {
            'psnr_db': _ordered_mean(row['psnr_db'] for row in rows),
            'ssim': _ordered_mean(row['ssim'] for row in rows),
            'worst_psnr_db': min(row['psnr_db'] for row in rows),
            'psnr_gap_db': (max(row['psnr_db'] for row in rows) -
                            min(row['psnr_db'] for row in rows)),
        }) for method, rows in methods.items())


def plot_report(summary, filename, title=None):
    """Plot mean PSNR against the degradation level, one curve per method.

    The figure is written as SVG.
    """
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    methods = OrderedDict()
    for row in summary:
        methods.setdefault(row['method'], []).append(row)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for method, rows in methods.items():
        rows = sorted(rows, key=lambda row: row['degradation_params'])
        levels = [row['degradation_params'] for row in rows]
        axes[0].plot(levels, [row['psnr_db'] for row in rows],
                     marker='o', label=method)
        axes[1].plot(levels, [row['ssim'] for row in rows],
                     marker='o', label=method)
    family = summary[0]['family'] if summary else ''
    for ax, label in zip(axes, ('PSNR (dB)', 'SSIM')):
        ax.set_xlabel('{} level'.format(family))
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[0].legend()
    if title:
        fig.suptitle(title)
    dirname = os.path.dirname(filename)
    if dirname:
        os.makedirs(dirname, exist_ok=True)
    fig.savefig(filename, format='svg', bbox_inches='tight',
                metadata={'Date': None})
    plt.close(fig)
    logger.info("Wrote plot %s", filename)
    return filename


def _direct_gaussian(sigma, size):
    """Gaussian evaluated directly on the centered grid and normalized."""
    offsets = np.arange(size) - size // 2
    radius2 = offsets[:, None]**2 + offsets[None, :]**2
    values = np.exp(-radius2 / (2. * sigma**2))
    return values / values.sum()


def kernel_transition_table(sigma_pairs=KERNEL_CHECK_SIGMAS,
                            taus=KERNEL_CHECK_TAUS,
                            size=21):
    """Compare transition kernels with Gaussians of the blended width.

    For every ``(sigma0, sigma1)`` pair and DoT, the kernel built from the
    two primary Gaussians is compared with a Gaussian of width
    ``(1 - tau) * sigma0 + tau * sigma1`` evaluated directly.

    Returns
    -------
    list of dict
        Rows with :data:`KERNEL_CHECK_FIELDS`.
    """
    rows = []
    for sigma0, sigma1 in sigma_pairs:
        for tau in taus:
            kernel = transition_kernel(sigma0, sigma1, tau, size)
            sigma_tau = kernel.params[0]
            reference = _direct_gaussian(sigma_tau, size)
            rows.append({
                'sigma0': float(sigma0),
                'sigma1': float(sigma1),
                'tau': float(tau),
                'sigma_tau': float(sigma_tau),
                'max_abs_deviation': float(
                    np.max(np.abs(kernel.values - reference))),
            })
    return rows
