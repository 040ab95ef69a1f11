"""
Expected price impact of a meta-order

With the noise dropped, the state equation becomes the linear ODE

  dx/dt = A x + a v(t) + b

driven by an exogenous rate schedule v. The expected fair price then
moves by

  E[S(t)] - s0 = gamma (X(t) - x0) - phi sum_i nu_i Q_i(t)

at zero drift. A single market maker relaxes this impact
exponentially once the order is done; a spectrum of makers with
different reversion rates relaxes on several time scales at once.

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
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import stats

from hybridexec.errors import ConfigError, FitError, OutputError, \
    PreconditionError
from hybridexec.model import build_state_matrices, derive_effective_params

log = logging.getLogger(__name__)

DEFAULT_INTERVALS = 4000

# Classes
#
@dataclass(frozen=True)
class RateSchedule:
    """
    Piecewise-constant trading rate on [0, horizon].

    pieces holds (start, end, rate) triples; the rate is zero outside
    every piece, and overlapping pieces add.

    """
    pieces: Tuple[Tuple[float, float, float], ...]
    horizon: float

    def __post_init__(self):
        pieces = tuple(
            (float(s), float(e), float(v)) for s, e, v in self.pieces
        )
        for s, e, _ in pieces:
            if not 0 <= s < e <= self.horizon:
                msg = 'piece [{0}, {1}) outside [0, {2}]'.format(s, e, self.horizon)
                raise ConfigError(msg)
        object.__setattr__(self, 'pieces', pieces)
        object.__setattr__(self, 'horizon', float(self.horizon))

    @classmethod
    def meta_order(cls, rate, t_exec, horizon):
        """Constant rate on [0, t_exec), nothing afterwards"""
        return cls(pieces=((0.0, t_exec, rate),), horizon=horizon)

    @property
    def breakpoints(self):
        points = {0.0, self.horizon}
        for s, e, _ in self.pieces:
            points.update((s, e))
        return tuple(sorted(points))

    @property
    def end_of_trading(self):
        return max((e for _, e, _ in self.pieces), default=0.0)

    def rate_at(self, t):
        """Rate at t (scalar or array), right-open pieces"""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for s, e, v in self.pieces:
            out = out + np.where((t >= s) & (t < e), v, 0.0)
        return float(out) if out.ndim == 0 else out

    def executed(self, t=None):
        """Shares sold by time t (by the horizon when t is None)"""
        t = self.horizon if t is None else t
        return sum(v * max(0.0, min(t, e) - s) for s, e, v in self.pieces)


@dataclass(frozen=True)
class ImpactScheduleSpec:
    """The "schedule" section of a configuration document"""
    rate: float
    t_exec: float
    horizon: float
    intervals: int = DEFAULT_INTERVALS

    @classmethod
    def from_dict(cls, doc):
        allowed = {f.name for f in dataclasses.fields(cls)}
        if not isinstance(doc, dict):
            raise ConfigError('schedule must be a JSON object')
        unknown = sorted(set(doc) - allowed)
        if unknown:
            msg = 'unknown key(s) in schedule: {0}'.format(', '.join(unknown))
            raise ConfigError(msg)
        try:
            return cls(**doc)
        except TypeError as e:
            raise ConfigError('schedule: {0}'.format(e)) from e

    def to_schedule(self):
        return RateSchedule.meta_order(self.rate, self.t_exec, self.horizon)


@dataclass(frozen=True)
class ExponentialFit:
    """Least-squares fit of log|curve - asymptote| against time"""
    rate: float
    intercept: float
    r_squared: float

    def __iter__(self):
        return iter((self.rate, self.r_squared))


# Functions
#
def make_schedule_grid(schedule, intervals=DEFAULT_INTERVALS):
    """
    Return a grid on [0, horizon] containing every breakpoint of the
    schedule, with about `intervals` intervals spread in proportion to
    segment length.

    """
    points = schedule.breakpoints
    parts = []
    for s, e in zip(points, points[1:]):
        k = max(1, int(round(intervals * (e - s) / schedule.horizon)))
        parts.append(np.linspace(s, e, k + 1)[:-1])
    parts.append(np.array([schedule.horizon]))
    return np.concatenate(parts)


def expected_state(schedule, mats, grid, initial):
    """
    Integrate dx/dt = A x + a v(t) + b over grid by the classical
    fourth-order Runge-Kutta method.

    The rate is evaluated at each step's midpoint and held over the
    step, which is exact when the grid contains the schedule's
    breakpoints (see make_schedule_grid()).

    Returns an array of shape (len(grid), n+1).

    """
    grid = np.asarray(grid, dtype=float)
    if grid[0] > 0 or grid[-1] < schedule.horizon - 1e-12 * schedule.horizon:
        raise PreconditionError('grid must cover [0, {0}]'.format(schedule.horizon))
    A, a, b = mats.A, mats.a, mats.b
    x = np.array(initial, dtype=float)
    out = np.empty((len(grid), x.size))
    out[0] = x
    for j in range(len(grid) - 1):
        h = grid[j + 1] - grid[j]
        force = a * schedule.rate_at(grid[j] + 0.5 * h) + b
        k1 = A @ x + force
        k2 = A @ (x + 0.5 * h * k1) + force
        k3 = A @ (x + 0.5 * h * k2) + force
        k4 = A @ (x + h * k3) + force
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[j + 1] = x
    return out


def impact_curve(schedule, config, grid, mats=None):
    """
    Return E[S(t)] - s0 along grid for the schedule.

    Exceptions
    ----------
    * PreconditionError - when config.mu != 0; the impact curve is
      defined at zero drift.

    """
    if config.mu != 0:
        raise PreconditionError(
            'impact curve needs mu == 0, got mu={0}'.format(config.mu)
        )
    if mats is None:
        mats = build_state_matrices(config, derive_effective_params(config))
    xs = expected_state(schedule, mats, grid, config.initial_state)
    QM = xs[:, :-1] @ config.weights if config.n else 0.0
    return config.gamma * (xs[:, -1] - config.x0) - config.phi * QM


def impact_curve_asymptote(schedule, config):
    """
    Limit of the impact curve as t -> infinity with trading stopped:
    every inventory settles at qbar0 and the position at
    x0 - executed shares.

    """
    q_inf = config.qbar0s
    qm = float(np.dot(config.weights, q_inf)) if config.n else 0.0
    return -config.gamma * schedule.executed() - config.phi * qm


def ensemble_superposition(schedule, config, grid):
    """
    Decompose the impact of a maker spectrum.

    Returns (ensemble, components) where components[i] is the impact
    curve of a market made by maker i alone with unit weight. With
    gamma == 0, ensemble == sum_i nu_i components[i].

    """
    ensemble = impact_curve(schedule, config, grid)
    components = []
    for mk in config.makers:
        single = config.replace(makers=(dataclasses.replace(mk, weight=1.0),))
        components.append(impact_curve(schedule, single, grid))
    return ensemble, np.array(components)


def fit_exponential_decay(times, curve, t_start, asymptote):
    """
    Fit curve(t) - asymptote ~ C exp(-rate t) on t >= t_start by least
    squares on the logarithm.

    Returns an ExponentialFit, which also unpacks as (rate, r_squared).

    Exceptions
    ----------
    * FitError - when the residual changes sign, vanishes, or does not
      strictly decrease in magnitude after t_start.

    """
    times = np.asarray(times, dtype=float)
    curve = np.asarray(curve, dtype=float)
    mask = times >= t_start
    resid = curve[mask] - asymptote
    t = times[mask]
    if resid.size < 3:
        raise FitError('fewer than three points after t_start={0}'.format(t_start))
    if np.any(resid == 0) or not (np.all(resid > 0) or np.all(resid < 0)):
        raise FitError('residual vanishes or changes sign after t_start')
    mag = np.abs(resid)
    if np.any(np.diff(mag) >= 0):
        raise FitError('residual is not strictly decreasing in magnitude')
    res = stats.linregress(t, np.log(mag))
    return ExponentialFit(
        rate=float(-res.slope), intercept=float(res.intercept),
        r_squared=float(res.rvalue ** 2),
    )


def write_impact_csv(times, curve, path):
    try:
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\r\n')
            writer.writerow(['t', 'impact'])
            for t, c in zip(times, curve):
                writer.writerow([repr(float(t)), repr(float(c))])
    except OSError as e:
        raise OutputError('cannot write {0}: {1}'.format(path, e)) from e


def plot_impact_curve(times, curve, path, t_exec=None, asymptote=None):
    """Save the impact curve as a line plot (SVG or by extension)"""
    from hybridexec.report import new_figure, save_figure
    fig, ax = new_figure()
    ax.plot(times, curve, lw=1.5, label='E[S(t)] - s0')
    if t_exec is not None:
        ax.axvline(t_exec, color='gray', ls='--', lw=0.8, label='end of order')
    if asymptote is not None:
        ax.axhline(asymptote, color='gray', ls=':', lw=0.8, label='asymptote')
    ax.set_xlabel('time')
    ax.set_ylabel('expected price impact')
    ax.legend()
    save_figure(fig, path)
