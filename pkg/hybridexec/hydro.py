"""
Market maker inventory under scaled optimal quotes

A market maker quoting the approximately optimal spreads

  delta_b(q) = (1/nu) ln(1 + nu/kappa) + (q + 1/2 - qbar0) h c2
  delta_a(q) = (1/nu) ln(1 + nu/kappa) + (-q + 1/2 + qbar0) h c2

is filled on the bid at intensity (A/h^2) exp(-kappa delta_b) and on
the ask at (A/h^2) exp(-kappa delta_a), each fill moving the
inventory q by +h or -h. As h -> 0 the inventory converges to an
Ornstein-Uhlenbeck process. This module simulates the jump process
exactly (event by event) and compares its moments to the limit.

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

import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from hybridexec.errors import ConfigError, EventCapError, NumericalWarning, \
    PreconditionError, ResourceError
from hybridexec.pathseq import UniformSequence, path_generator

log = logging.getLogger(__name__)

CAP_FACTOR = 10
CAP_MARGIN = 200
HYDRO_CHUNK = 5000
DRAW_WINDOW = 256

# Classes
#
@dataclass(frozen=True)
class QuoteModelParams:
    """
    Parameters of the quoting model.

    Fields
    ------
    * A - base arrival intensity of market orders, > 0.
    * kappa - decay of the fill intensity with the spread, > 0.
    * nu_risk - the market maker's risk aversion, > 0.
    * mu - drift of the reference price.
    * sigma - volatility of the reference price, > 0.

    """
    A: float
    kappa: float
    nu_risk: float
    mu: float
    sigma: float

    def __post_init__(self):
        for name in ('A', 'kappa', 'nu_risk', 'sigma'):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, float)) \
                    or not val > 0:
                msg = 'quote_model.{0} must be a number > 0, got {1!r}'
                raise ConfigError(msg.format(name, val))
            object.__setattr__(self, name, float(val))
        if isinstance(self.mu, bool) or not isinstance(self.mu, (int, float)):
            raise ConfigError('quote_model.mu must be a number')
        object.__setattr__(self, 'mu', float(self.mu))

    @classmethod
    def from_dict(cls, doc):
        allowed = {f.name for f in dataclasses.fields(cls)}
        if not isinstance(doc, dict):
            raise ConfigError('quote_model must be a JSON object')
        unknown = sorted(set(doc) - allowed)
        if unknown:
            msg = 'unknown key(s) in quote_model: {0}'.format(', '.join(unknown))
            raise ConfigError(msg)
        missing = sorted(allowed - set(doc))
        if missing:
            msg = 'quote_model is missing key(s): {0}'.format(', '.join(missing))
            raise ConfigError(msg)
        return cls(**doc)


@dataclass(frozen=True)
class LimitParams:
    """
    Ornstein-Uhlenbeck limit of the inventory.

    theta is the mean-reversion rate of the limiting generator,
    4 c1 c2 kappa. theta_printed keeps 2 c1 c2 kappa for reference.

    """
    theta: float
    qbar0: float
    sigma_q: float
    c1: float
    c2: float
    theta_printed: float

    def mean(self, t, q0=0.0):
        """Mean of the limit at time t"""
        decay = np.exp(-self.theta * np.asarray(t, dtype=float))
        return self.qbar0 + (q0 - self.qbar0) * decay

    def variance(self, t):
        """Variance of the limit at time t, from a fixed start"""
        t = np.asarray(t, dtype=float)
        return self.sigma_q ** 2 / (2 * self.theta) \
            * -np.expm1(-2 * self.theta * t)


@dataclass(frozen=True, eq=False)
class JumpPath:
    """Event times and inventory after each event; values[0] is q0"""
    times: np.ndarray
    values: np.ndarray
    h: float

    def value_at(self, t):
        j = int(np.searchsorted(self.times, t, side='right')) - 1
        return float(self.values[max(j, 0)])


@dataclass(frozen=True)
class MomentEstimate:
    """Sample moments of q(t) at one scale h against the limit"""
    h: float
    t: float
    mean: float
    mean_se: float
    variance: float
    variance_se: float
    target_mean: float
    target_variance: float
    mean_error: float
    variance_error: float
    mean_events: float


@dataclass(frozen=True)
class ConvergenceReport:
    """
    Moment errors along a decreasing list of scales.

    mean_decreasing and variance_decreasing map each observation time
    to True when the absolute error at every scale is at most the
    error at the previous scale plus one standard error.

    """
    params: QuoteModelParams
    limit: LimitParams
    horizon: float
    n_paths: int
    seed: int
    h_list: Tuple[float, ...]
    estimates: Tuple[MomentEstimate, ...]
    mean_decreasing: dict
    variance_decreasing: dict

    @property
    def converged(self):
        if len(self.h_list) < 2:
            return False
        return all(self.mean_decreasing.values()) \
            and all(self.variance_decreasing.values())

    def to_dict(self):
        return {
            'params': dataclasses.asdict(self.params),
            'limit': dataclasses.asdict(self.limit),
            'horizon': self.horizon,
            'n_paths': self.n_paths,
            'seed': self.seed,
            'h_list': list(self.h_list),
            'estimates': [dataclasses.asdict(e) for e in self.estimates],
            'mean_decreasing': {repr(k): v for k, v in self.mean_decreasing.items()},
            'variance_decreasing': {
                repr(k): v for k, v in self.variance_decreasing.items()
            },
            'converged': self.converged,
        }


# Functions
#
def limit_params(p):
    """
    Return the LimitParams of quoting parameters p:

      c1 = (A/2)(1 + nu/kappa)^(-kappa/nu)
      c2 = sqrt(sigma^2 nu / (2 kappa A) (1 + nu/kappa)^(1 + kappa/nu))
      theta = 4 c1 c2 kappa, qbar0 = mu/(nu sigma^2), sigma_q = 2 sqrt(c1)

    """
    ratio = 1.0 + p.nu_risk / p.kappa
    c1 = 0.5 * p.A * ratio ** (-p.kappa / p.nu_risk)
    c2 = math.sqrt(
        p.sigma ** 2 * p.nu_risk / (2 * p.kappa * p.A)
        * ratio ** (1 + p.kappa / p.nu_risk)
    )
    return LimitParams(
        theta=4 * c1 * c2 * p.kappa,
        qbar0=p.mu / (p.nu_risk * p.sigma ** 2),
        sigma_q=2 * math.sqrt(c1),
        c1=c1, c2=c2,
        theta_printed=2 * c1 * c2 * p.kappa,
    )


def quote_spreads(q, p, h):
    """
    Return the bid and ask spreads (delta_b, delta_a) at inventory q
    (scalar or array) and scale h.

    """
    if not h > 0:
        raise PreconditionError('h must be > 0, got {0}'.format(h))
    lim = limit_params(p)
    base = math.log1p(p.nu_risk / p.kappa) / p.nu_risk
    q = np.asarray(q, dtype=float)
    step = h * lim.c2
    delta_b = base + (q + 0.5 - lim.qbar0) * step
    delta_a = base + (-q + 0.5 + lim.qbar0) * step
    if delta_b.ndim == 0:
        return float(delta_b), float(delta_a)
    return delta_b, delta_a


def fill_intensities(q, p, h):
    """Bid and ask fill intensities (A/h^2) exp(-kappa delta)"""
    delta_b, delta_a = quote_spreads(q, p, h)
    scale = p.A / (h * h)
    return scale * np.exp(-p.kappa * np.asarray(delta_b)), \
        scale * np.exp(-p.kappa * np.asarray(delta_a))


def default_event_cap(p, h, horizon):
    """Largest number of events allowed on one path"""
    return int(math.ceil(CAP_FACTOR * p.A * horizon / (h * h))) + CAP_MARGIN


def _warn_negative_spread(h):
    msg = 'negative spread quoted at h={0}; fill intensity exceeds A/h^2'
    log.warning(msg.format(h))
    warnings.warn(msg.format(h), NumericalWarning, stacklevel=3)


def simulate_inventory_jump(p, h, horizon, rng, q0=0.0, cap=None):
    """
    Simulate one inventory path exactly, event by event.

    Between events the intensities are constant, so the waiting time
    is exponential with the total intensity and the event is a bid
    fill with probability theta_b/(theta_b + theta_a).

    Required Arguments
    ------------------
    * p - QuoteModelParams.
    * h - order size scale, > 0.
    * horizon - simulation end time T.
    * rng - numpy Generator.

    Exceptions
    ----------
    * EventCapError - when the path has more than cap events.

    """
    if cap is None:
        cap = default_event_cap(p, h, horizon)
    t = 0.0
    q = float(q0)
    times = [0.0]
    values = [q]
    warned = False
    while True:
        db, da = quote_spreads(q, p, h)
        if (db < 0 or da < 0) and not warned:
            _warn_negative_spread(h)
            warned = True
        lb, la = fill_intensities(q, p, h)
        total = float(lb + la)
        t += rng.exponential(1.0 / total)
        if t >= horizon:
            break
        if len(times) > cap:
            raise EventCapError(cap, h)
        q += h if rng.random() < lb / total else -h
        times.append(t)
        values.append(q)
    return JumpPath(times=np.array(times), values=np.array(values), h=h)


def _simulate_batch(p, h, horizon, streams, observe, q0, cap,
        window=DRAW_WINDOW):
    """
    Vectorized event loop over a block of paths.

    Event j of a path uses row j of its uniform stream; rows are
    fetched window by window for the paths still running.

    Returns (q at each observation time, event counts, any negative
    spread seen).

    """
    P = len(streams)
    t = np.zeros(P)
    q = np.full(P, float(q0))
    counts = np.zeros(P, dtype=int)
    obs = np.full((P, len(observe)), np.nan)
    active = np.ones(P, dtype=bool)
    buf = np.empty((P, window, streams.dims))
    negative = False
    for j in range(cap):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        w = j % window
        if w == 0:
            buf[idx] = streams.take(idx, window)
        qa = q[idx]
        db, da = quote_spreads(qa, p, h)
        negative = negative or bool(np.any(db < 0) or np.any(da < 0))
        lb, la = fill_intensities(qa, p, h)
        total = lb + la
        t_next = t[idx] - np.log(buf[idx, w, 0]) / total
        for c, tau in enumerate(observe):
            hit = (t_next > tau) & np.isnan(obs[idx, c])
            obs[idx[hit], c] = qa[hit]
        done = t_next >= horizon
        active[idx[done]] = False
        go = ~done
        up = buf[idx, w, 1] < lb / total
        q[idx[go]] = qa[go] + np.where(up[go], h, -h)
        t[idx[go]] = t_next[go]
        counts[idx[go]] += 1
    else:
        if np.any(active):
            raise EventCapError(cap, h)
    return obs, counts, negative


def estimate_hydro_chunk_bytes(chunk_size, n_observe=2, window=DRAW_WINDOW):
    """
    Rough working set of one chunk of simulate_inventories(), in
    bytes. It does not grow with the event cap.

    """
    per_path = 8 * (2 * window * 2 + 8 + n_observe)
        # draw buffer and one fresh window, plus path state
    return int(chunk_size) * per_path


def simulate_inventories(
    p, h, horizon, n_paths, seed, observe=None, q0=0.0, cap=None,
    chunk_size=HYDRO_CHUNK, max_memory_mb=None
):
    """
    Simulate n_paths inventory paths and return their values at the
    observation times (default (T/2, T)) as an (n_paths, len(observe))
    array, together with the (n_paths,) event counts.

    Path i draws its uniforms from the generator keyed by (seed, i),
    so results do not depend on chunk_size.

    Exceptions
    ----------
    * ResourceError - when a chunk would need more than max_memory_mb.

    * EventCapError - when a path has more than cap events.

    """
    if not h > 0:
        raise PreconditionError('h must be > 0, got {0}'.format(h))
    if chunk_size < 1:
        raise PreconditionError(
            'chunk_size must be >= 1, got {0}'.format(chunk_size)
        )
    if observe is None:
        observe = (0.5 * horizon, horizon)
    observe = tuple(float(t) for t in observe)
    if cap is None:
        cap = default_event_cap(p, h, horizon)
    if max_memory_mb is not None:
        need = estimate_hydro_chunk_bytes(
            min(chunk_size, n_paths), len(observe)
        )
        if need > max_memory_mb * 2 ** 20:
            msg_format = (
                'hydro chunk needs about {0:.3g} MB, above '
                'max_memory_mb={1}; reduce chunk_size'
            )
            raise ResourceError(msg_format.format(need / 2 ** 20, max_memory_mb))
    draws = UniformSequence(n_paths, seed, salt=1, dims=2)
    values = np.empty((n_paths, len(observe)))
    counts = np.empty(n_paths, dtype=int)
    negative = False
    for start in range(0, n_paths, chunk_size):
        stop = min(n_paths, start + chunk_size)
        obs, cnt, neg = _simulate_batch(
            p, h, horizon, draws.streams(start, stop), observe, q0, cap
        )
        values[start:stop] = obs
        counts[start:stop] = cnt
        negative = negative or neg
        log.debug('h=%g: paths %d..%d done', h, start, stop - 1)
    if negative:
        _warn_negative_spread(h)
    return values, counts


def event_counts(p, h, horizon, n_paths, seed):
    """Number of events on each of n_paths paths over [0, T]"""
    return simulate_inventories(p, h, horizon, n_paths, seed)[1]


def first_event_times(p, q, h, n, seed):
    """
    Return n independent waiting times to the first event from a
    fixed inventory q, with the total intensity they should follow.

    """
    lb, la = fill_intensities(q, p, h)
    total = float(lb + la)
    rng = path_generator(seed, 0, salt=2)
    return rng.exponential(1.0 / total, size=int(n)), total


def _variance_se(x):
    n = x.size
    centered = x - np.mean(x)
    m4 = np.mean(centered ** 4)
    var = np.var(x, ddof=1)
    return math.sqrt(max(m4 - var * var, 0.0) / n)


def convergence_check(p, h_list, horizon, n_paths, seed, q0=0.0,
        max_memory_mb=None):
    """
    Compare moments of the jump inventory at T/2 and T with the
    Ornstein-Uhlenbeck limit, for each scale in h_list.

    Required Arguments
    ------------------
    * p - QuoteModelParams.
    * h_list - strictly decreasing scales.
    * horizon - time T.
    * n_paths - paths per scale, >= 2.
    * seed - master seed; each scale reuses it.

    Optional Arguments
    ------------------
    * q0 - starting inventory.
    * max_memory_mb - memory budget per chunk of paths.

    Returns a ConvergenceReport.

    """
    h_list = tuple(float(h) for h in h_list)
    if not h_list:
        raise PreconditionError('h_list must not be empty')
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise PreconditionError(
            'h_list must be strictly decreasing, got {0}'.format(list(h_list))
        )
    if n_paths < 2:
        raise PreconditionError('n_paths must be >= 2')
    lim = limit_params(p)
    observe = (0.5 * horizon, horizon)
    estimates = []
    for h in h_list:
        log.info('hydro: h=%g, %d paths', h, n_paths)
        values, counts = simulate_inventories(
            p, h, horizon, n_paths, seed, observe=observe, q0=q0,
            max_memory_mb=max_memory_mb,
        )
        for c, t in enumerate(observe):
            x = values[:, c]
            mean = float(np.mean(x))
            var = float(np.var(x, ddof=1))
            target_mean = float(lim.mean(t, q0))
            target_var = float(lim.variance(t))
            estimates.append(MomentEstimate(
                h=h, t=t, mean=mean,
                mean_se=float(math.sqrt(var / n_paths)),
                variance=var, variance_se=_variance_se(x),
                target_mean=target_mean, target_variance=target_var,
                mean_error=abs(mean - target_mean),
                variance_error=abs(var - target_var),
                mean_events=float(np.mean(counts)),
            ))
    mean_dec, var_dec = {}, {}
    for t in observe:
        row = [e for e in estimates if e.t == t]
        mean_dec[t] = all(
            b.mean_error <= a.mean_error + b.mean_se
            for a, b in zip(row, row[1:])
        )
        var_dec[t] = all(
            b.variance_error <= a.variance_error + b.variance_se
            for a, b in zip(row, row[1:])
        )
    return ConvergenceReport(
        params=p, limit=lim, horizon=float(horizon), n_paths=int(n_paths),
        seed=int(seed), h_list=h_list, estimates=tuple(estimates),
        mean_decreasing=mean_dec, variance_decreasing=var_dec,
    )
