"""
Summary statistics, histograms and density estimates of simulated
outcomes, with CSV, JSON and SVG export.
"""

# Copyright © 2026 The hybridexec Authors
#
# This file is part of the Hybrid-Impact Execution Library (hybridexec)
#
# This program is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.
#

import csv
import dataclasses
import json
import logging
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from scipy import stats

from hybridexec.errors import OutputError, SampleError

log = logging.getLogger(__name__)

QUANTILE_LEVELS = (1, 5, 25, 50, 75, 95, 99)
SILVERMAN_FACTOR = 1.06

# Classes
#
@dataclass(frozen=True)
class SummaryStats:
    """
    Moments and quantiles of a sample.

    * variance - unbiased.
    * skewness, excess_kurtosis - bias-adjusted; 0 for a constant
      sample.
    * quantiles - {percent: value} at 1, 5, 25, 50, 75, 95, 99.
    * se - standard error of the mean.

    """
    n: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    quantiles: Dict[int, float]
    se: float

    @property
    def std(self):
        return math.sqrt(self.variance)

    def to_dict(self):
        out = dataclasses.asdict(self)
        out['quantiles'] = {str(k): v for k, v in self.quantiles.items()}
        return out


# Functions
#
def summarize(samples):
    """
    Return the SummaryStats of samples.

    The sample is sorted first, so the result does not depend on the
    order of the input.

    Exceptions
    ----------
    * SampleError - with fewer than two samples or non-finite values.

    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < 2:
        raise SampleError('summary needs at least 2 samples, got {0}'.format(n))
    if not np.all(np.isfinite(x)):
        raise SampleError('samples contain non-finite values')
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1))
    if var > 0 and n >= 4:
        skew = float(stats.skew(x, bias=False))
        kurt = float(stats.kurtosis(x, fisher=True, bias=False))
    elif var > 0:
        skew = float(stats.skew(x, bias=False)) if n >= 3 else 0.0
        kurt = 0.0
    else:
        skew, kurt = 0.0, 0.0
    qs = np.quantile(x, [q / 100.0 for q in QUANTILE_LEVELS])
    return SummaryStats(
        n=int(n), mean=mean, variance=var, skewness=skew,
        excess_kurtosis=kurt,
        quantiles={q: float(v) for q, v in zip(QUANTILE_LEVELS, qs)},
        se=math.sqrt(var / n),
    )


def histogram(samples, bins=50):
    """
    Return (edges, counts) of an equal-width histogram over
    [min, max]. A constant sample gets a single bin.

    """
    x = np.asarray(samples, dtype=float).ravel()
    if bins < 1:
        raise ValueError('bins must be >= 1, got {0}'.format(bins))
    if x.size == 0:
        raise SampleError('histogram of an empty sample')
    if np.ptp(x) == 0:
        bins = 1
    counts, edges = np.histogram(x, bins=bins)
    return edges, counts


def silverman_bandwidth(samples):
    """Kernel standard deviation 1.06 sigma n^(-1/5)"""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise SampleError('bandwidth needs at least 2 samples')
    return SILVERMAN_FACTOR * float(np.std(x, ddof=1)) * x.size ** -0.2


def kde(samples, eval_grid):
    """
    Gaussian kernel density estimate of samples on eval_grid, with
    Silverman's bandwidth.

    Exceptions
    ----------
    * SampleError - when the bandwidth is zero (constant sample).

    """
    x = np.asarray(samples, dtype=float).ravel()
    if silverman_bandwidth(x) <= 0:
        raise SampleError('zero KDE bandwidth: the sample is constant')
    est = stats.gaussian_kde(x, bw_method=SILVERMAN_FACTOR * x.size ** -0.2)
    return est(np.asarray(eval_grid, dtype=float))


def kde_grid(samples, points=512, pad=5.0):
    """Evaluation grid spanning pad bandwidths beyond the sample range"""
    x = np.asarray(samples, dtype=float).ravel()
    bw = silverman_bandwidth(x)
    return np.linspace(x.min() - pad * bw, x.max() + pad * bw, points)


def _write_rows(path, rows):
    try:
        with open(path, 'w', newline='', encoding='utf-8') as f:
            csv.writer(f, lineterminator='\r\n').writerows(rows)
    except OSError as e:
        raise OutputError('cannot write {0}: {1}'.format(path, e)) from e


def write_histogram_csv(edges, counts, path):
    rows = [['left', 'right', 'count']]
    rows += [
        [repr(float(edges[i])), repr(float(edges[i + 1])), int(counts[i])]
        for i in range(len(counts))
    ]
    _write_rows(path, rows)


def write_kde_csv(grid, density, path):
    rows = [['x', 'density']]
    rows += [[repr(float(g)), repr(float(d))] for g, d in zip(grid, density)]
    _write_rows(path, rows)


def write_json(doc, path):
    """Write doc as UTF-8 JSON"""
    try:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(doc, f, indent=2, ensure_ascii=False, allow_nan=True)
            f.write('\n')
    except OSError as e:
        raise OutputError('cannot write {0}: {1}'.format(path, e)) from e


# Figures
#
def new_figure(size=(6.4, 4.0)):
    """Return (figure, axes) drawn by the non-interactive Agg canvas"""
    fig = Figure(figsize=size)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    ax.grid(alpha=0.3)
    return fig, ax


def save_figure(fig, path):
    """Save fig to path; the format follows the file extension"""
    try:
        fig.tight_layout()
        fig.savefig(path)
    except OSError as e:
        raise OutputError('cannot write {0}: {1}'.format(path, e)) from e
    log.debug('figure saved: %s', path)


def plot_distribution(samples, path, title='', xlabel='', bins=50):
    """Histogram (as a density) with the KDE overlaid"""
    x = np.asarray(samples, dtype=float).ravel()
    fig, ax = new_figure()
    ax.hist(x, bins=bins if np.ptp(x) > 0 else 1, density=True, alpha=0.35,
        color='C0', label='histogram')
    if x.size >= 2 and np.ptp(x) > 0:
        grid = kde_grid(x)
        ax.plot(grid, kde(x, grid), color='C1', lw=1.5, label='KDE')
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel('density')
    ax.legend()
    save_figure(fig, path)


def plot_trajectories(times, series, path, ylabel='remaining position'):
    """One line per named series, e.g. expected X(t) per strategy"""
    fig, ax = new_figure()
    for name, values in series.items():
        ax.plot(times, values, lw=1.5, label=name)
    ax.set_xlabel('time')
    ax.set_ylabel(ylabel)
    ax.legend()
    save_figure(fig, path)
