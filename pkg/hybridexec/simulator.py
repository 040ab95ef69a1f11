"""
Monte Carlo engine for the execution model

Paths of the state x = (Q_1..Q_n, X) are generated by the
Euler-Maruyama scheme

  x[k+1] = x[k] + (A x[k] + a v[k] + b) dt + Sigma dB[k]

with v[k] the strategy's rate at (t[k], x[k]), held constant over the
step. The fair price follows from the state and the price Brownian
motion in integral form,

  S(t) = s0 + mu t + sigma_s B_S(t) + gamma (X(t) - x0) - phi Q^M(t)

and the transacted price is S - eta v.

All strategies of a run are evaluated on the same Brownian increments
(common random numbers). The increments of path i depend only on
(seed, i), so results do not depend on the number of workers.

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
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import stats

from hybridexec.errors import NonFiniteStateError, OutputError, \
    PreconditionError, ResourceError, SampleError
from hybridexec.model import build_state_matrices, derive_effective_params
from hybridexec.pathseq import BrownianSequence

log = logging.getLogger(__name__)

DEFAULT_STEPS = 1000
DEFAULT_CHUNK = 500
OUTCOME_FIELDS = (
    'pnl_def', 'pnl_cf', 'qv', 'terminal_position', 'block_penalty',
    'objective_econ', 'objective_lq', 'objective_lq_full', 'shortfall',
)

# Classes
#
@dataclass(frozen=True, eq=False)
class SimPath:
    """
    One path, or a batch of paths sharing a time grid.

    Arrays carry a leading path axis of length P. With batched False
    (a single path) P is 1 and the outcome functions return floats.

    Fields
    ------
    * times - (K+1,) grid on [0, T].
    * state - (P, K+1, n+1) states (Q_1..Q_n, X).
    * rate - (P, K) rate applied over each step.
    * price - (P, K+1) fair price S.
    * traded_price - (P, K) transacted price S - eta v.
    * brownian - (P, K, 3) increments (dB_Q, dB_X, dB_S).
    * config - the MarketConfig simulated.

    """
    times: np.ndarray
    state: np.ndarray
    rate: np.ndarray
    price: np.ndarray
    traded_price: np.ndarray
    brownian: np.ndarray
    config: object
    batched: bool = True

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @property
    def position(self):
        """Remaining position X, shape (P, K+1)"""
        return self.state[..., -1]

    @property
    def inventories(self):
        """Maker inventories Q, shape (P, K+1, n)"""
        return self.state[..., :-1]

    def _out(self, values):
        return values if self.batched else float(values[0])


@dataclass(frozen=True)
class PathOutcome:
    """
    Outcomes of one simulated path.

    objective_lq_full adds the constants dropped from the LQ
    objective, gamma m^2 T - (gamma/2) x0^2.

    """
    pnl_def: float
    pnl_cf: float
    qv: float
    terminal_position: float
    block_penalty: float
    objective_econ: float
    objective_lq: float
    objective_lq_full: float

    @property
    def shortfall(self):
        """Implementation shortfall, the negated P&L"""
        return -self.pnl_def


@dataclass(frozen=True, eq=False)
class SimResult:
    """
    Outcomes of a Monte Carlo run.

    Fields
    ------
    * strategies - strategy names in run order.
    * columns - {name: {field: (n_paths,) array}} for OUTCOME_FIELDS.
    * mean_position - {name: (K+1,) Monte Carlo mean of X(t)}.
    * kept_paths - {name: SimPath} of the first paths, when requested.
    * times - the simulation grid.

    """
    strategies: Tuple[str, ...]
    columns: Dict[str, Dict[str, np.ndarray]]
    mean_position: Dict[str, np.ndarray]
    kept_paths: Dict[str, SimPath]
    times: np.ndarray
    seed: int
    n_paths: int
    dt: float

    def column(self, name, field='objective_lq'):
        """Return the (n_paths,) array of one outcome field"""
        try:
            return self.columns[name][field]
        except KeyError as e:
            msg = 'no outcome {0!r} for strategy {1!r}'.format(field, name)
            raise KeyError(msg) from e

    def outcomes(self, name):
        """Return the list of PathOutcome of one strategy, by path"""
        cols = self.columns[name]
        names = [f.name for f in dataclasses.fields(PathOutcome)]
        return [
            PathOutcome(**{k: float(cols[k][i]) for k in names})
            for i in range(self.n_paths)
        ]


@dataclass(frozen=True)
class PairedDifference:
    """
    Paired comparison of an outcome of strategies a and b on common
    random numbers; significant when mean(a - b) > 0 at one-sided
    level 1 - alpha.

    """
    a: str
    b: str
    field: str
    n: int
    mean: float
    se: float
    z: float
    p_value: float
    significant: bool


# Functions
#
def step_count(horizon, dt):
    """
    Return the number of Euler steps K = T/dt.

    Exceptions
    ----------
    * PreconditionError - when dt does not divide T.

    """
    if not dt > 0:
        raise PreconditionError('dt must be > 0, got {0}'.format(dt))
    steps = int(round(horizon / dt))
    if steps < 1 or abs(steps * dt - horizon) > 1e-9 * horizon:
        msg = 'dt={0} does not divide the horizon T={1}'.format(dt, horizon)
        raise PreconditionError(msg)
    return steps


def _euler(strategy, mats, config, dt, dB, first_path=0):
    P, K, _ = dB.shape
    dim = mats.dim
    times = np.linspace(0.0, K * dt, K + 1)
    state = np.empty((P, K + 1, dim))
    rate = np.empty((P, K))
    state[:, 0, :] = config.initial_state
    A_t = mats.A.T
    Sigma_t = mats.Sigma.T
    a, b = mats.a, mats.b
    x = state[:, 0, :]
    for k in range(K):
        v = np.broadcast_to(strategy.rate(times[k], x), (P,))
        x = x + (x @ A_t + v[:, None] * a + b) * dt + dB[:, k, :2] @ Sigma_t
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(x), axis=1))[0])
            raise NonFiniteStateError(k + 1, first_path + bad)
        rate[:, k] = v
        state[:, k + 1, :] = x
    B_S = np.concatenate(
        [np.zeros((P, 1)), np.cumsum(dB[:, :, 2], axis=1)], axis=1
    )
    QM = state[..., :-1] @ config.weights if config.n else 0.0
    price = config.s0 + config.mu * times + config.sigma_s * B_S \
        + config.gamma * (state[..., -1] - config.x0) - config.phi * QM
    traded = price[:, :-1] - config.eta * rate
    return SimPath(
        times=times, state=state, rate=rate, price=price,
        traded_price=traded, brownian=dB, config=config,
    )


def simulate_path(strategy, mats, config, dt, increments):
    """
    Simulate one path, or a batch of paths, under a strategy.

    Required Arguments
    ------------------
    * strategy - a StrategySpec.
    * mats - StateMatrices of config.
    * config - MarketConfig.
    * dt - time step; must divide the horizon.
    * increments - Brownian increments (dB_Q, dB_X, dB_S) with
      variance dt, shape (K, 3) for one path or (P, K, 3) for a batch.

    Exceptions
    ----------
    * NonFiniteStateError - when the state overflows; the error names
      the step and the path.

    """
    dB = np.asarray(increments, dtype=float)
    single = dB.ndim == 2
    if single:
        dB = dB[None, ...]
    K = step_count(config.horizon, dt)
    if dB.shape[1:] != (K, 3):
        msg = 'increments must have shape (..., {0}, 3), got {1}'.format(
            K, dB.shape
        )
        raise ValueError(msg)
    path = _euler(strategy, mats, config, dt, dB)
    return dataclasses.replace(path, batched=not single)


def expected_path(strategy, mats, config, dt):
    """
    Return the path with all noise switched off. For strategies whose
    rate is affine in the state this is the mean of the Euler scheme.

    """
    K = step_count(config.horizon, dt)
    return simulate_path(strategy, mats, config, dt, np.zeros((K, 3)))


def pnl_definitional(path):
    """
    P&L by definition,

      Pi(T) = X(T)(S(T) - S(0)) + sum_k (S(0) - S~[k]) (X[k+1] - X[k])

    with left-point (Ito) sums.

    """
    X = path.position
    S = path.price
    dX = np.diff(X, axis=1)
    pnl = X[:, -1] * (S[:, -1] - S[:, 0]) \
        + np.sum((S[:, :1] - path.traded_price) * dX, axis=1)
    return path._out(pnl)


def pnl_closed_form(path):
    """
    P&L by the integration-by-parts expansion,

      gamma m^2 T + int {-eta v^2 - gamma v X
                         + [mu - phi sum_i nu_i theta_i (qbar_i - Q_i)] X} du
      - phi sigma_QM int X dB_Q + m int (eta v + gamma X) dB_X
      + sigma_s int X dB_S

    where qbar_i = qbar1_i v + qbar0_i; left-point sums throughout.

    """
    c = path.config
    dt = path.dt
    v = path.rate
    Xl = path.position[:, :-1]
    dB = path.brownian
    if c.n:
        Ql = path.inventories[:, :-1, :]
        qbar = v[..., None] * c.qbar1s + c.qbar0s
        transient = c.phi * ((qbar - Ql) @ (c.weights * c.thetas))
    else:
        transient = 0.0
    sigma_qm = float(np.dot(c.weights, c.sigma_qs)) if c.n else 0.0
    drift = -c.eta * v * v - c.gamma * v * Xl + (c.mu - transient) * Xl
    pnl = c.gamma * c.m ** 2 * path.times[-1] \
        + np.sum(drift, axis=1) * dt \
        - c.phi * sigma_qm * np.sum(Xl * dB[..., 0], axis=1) \
        + c.m * np.sum((c.eta * v + c.gamma * Xl) * dB[..., 1], axis=1) \
        + c.sigma_s * np.sum(Xl * dB[..., 2], axis=1)
    return path._out(pnl)


def quadratic_variation(path):
    """
    Accumulated quadratic variation of the P&L, the left-point sum of

      m^2 eta^2 v^2 + 2 m^2 eta gamma X v
      + (phi^2 sigma_QM^2 + m^2 gamma^2 + sigma_s^2) X^2

    """
    c = path.config
    v = path.rate
    Xl = path.position[:, :-1]
    sigma_qm = float(np.dot(c.weights, c.sigma_qs)) if c.n else 0.0
    m2 = c.m ** 2
    coef = (c.phi * sigma_qm) ** 2 + m2 * c.gamma ** 2 + c.sigma_s ** 2
    integrand = m2 * c.eta ** 2 * v * v + 2 * m2 * c.eta * c.gamma * Xl * v \
        + coef * Xl * Xl
    return path._out(np.sum(integrand, axis=1) * path.dt)


def objective_econ(path, config=None):
    """Penalized P&L, Pi(T) - beta X(T)^2 - lam QV"""
    c = config if config is not None else path.config
    pnl = np.atleast_1d(pnl_definitional(path))
    qv = np.atleast_1d(quadratic_variation(path))
    XT = path.position[:, -1]
    return path._out(pnl - c.beta * XT * XT - c.lam * qv)


def objective_lq(path, mats, eff, mu):
    """
    Pathwise LQ objective

      x(T)'G x(T) + int (2 v k'x - eta_tilde v^2 - psi X^2 + mu X) du

    The rate is constant over each step, so v^2 is integrated exactly;
    terms linear in the state use the trapezoid rule, and X^2 uses the
    exact integral of the linear interpolant plus the Brownian-bridge
    term m^2 dt^2 / 6.

    """
    dt = path.dt
    x = path.state
    v = path.rate
    xl, xr = x[:, :-1, :], x[:, 1:, :]
    Xl, Xr = xl[..., -1], xr[..., -1]
    m = path.config.m
    kx = 0.5 * ((xl + xr) @ mats.k)
    X2 = (Xl * Xl + Xl * Xr + Xr * Xr) / 3.0 + m * m * dt / 6.0
    running = 2.0 * v * kx - eff.eta_tilde * v * v - eff.psi * X2 \
        + mu * 0.5 * (Xl + Xr)
    xT = x[:, -1, :]
    terminal = np.einsum('pi,ij,pj->p', xT, mats.G, xT)
    return path._out(terminal + np.sum(running, axis=1) * dt)


def _outcome_columns(path, mats, eff, config):
    pnl_def = np.atleast_1d(pnl_definitional(path))
    qv = np.atleast_1d(quadratic_variation(path))
    XT = path.position[:, -1]
    block = config.beta * XT * XT
    lq = np.atleast_1d(objective_lq(path, mats, eff, config.mu))
    constants = config.gamma * config.m ** 2 * config.horizon \
        - 0.5 * config.gamma * config.x0 ** 2
    return {
        'pnl_def': pnl_def,
        'pnl_cf': np.atleast_1d(pnl_closed_form(path)),
        'qv': qv,
        'terminal_position': XT.copy(),
        'block_penalty': block,
        'objective_econ': pnl_def - block - config.lam * qv,
        'objective_lq': lq,
        'objective_lq_full': lq + constants,
        'shortfall': -pnl_def,
    }


def _normalize_strategies(strategies):
    if isinstance(strategies, dict):
        items = list(strategies.items())
    else:
        items = []
        for s in strategies:
            if isinstance(s, tuple):
                items.append(s)
            else:
                items.append((s.kind, s))
    if not items:
        raise PreconditionError('at least one strategy is needed')
    names = [name for name, _ in items]
    if len(set(names)) != len(names):
        raise PreconditionError('strategy names must be unique: {0}'.format(names))
    return items


def estimate_chunk_bytes(config, dt, chunk_size):
    """Approximate peak memory of one chunk of one strategy, in bytes"""
    K = step_count(config.horizon, dt)
    per_path = (K + 1) * (config.n + 1) + 4 * (K + 1) + 3 * K
    return 8 * chunk_size * per_path


def monte_carlo(
    strategies, config, n_paths, dt, seed, mats=None, eff=None, workers=1,
    chunk_size=DEFAULT_CHUNK, keep_paths=0, max_memory_mb=None
):
    """
    Simulate every strategy on common random numbers.

    Required Arguments
    ------------------
    * strategies - StrategySpec objects, (name, StrategySpec) pairs or
      a {name: StrategySpec} dict.
    * config - MarketConfig.
    * n_paths - number of paths, >= 1.
    * dt - time step dividing the horizon.
    * seed - master seed of the counter-based generator.

    Optional Arguments
    ------------------
    * workers - number of worker threads. Default is 1.
    * chunk_size - paths per work unit. Default is 500. Results
      depend on the seed only, not on workers or chunk_size.
    * keep_paths - keep the full SimPath of the first paths.
    * max_memory_mb - refuse runs whose working set would exceed this.

    Exceptions
    ----------
    * ResourceError - when the estimated working set exceeds
      max_memory_mb.

    * NonFiniteStateError - when a simulated state overflows.

    """
    if n_paths < 1:
        raise PreconditionError('n_paths must be >= 1, got {0}'.format(n_paths))
    if chunk_size < 1:
        raise PreconditionError('chunk_size must be >= 1')
    items = _normalize_strategies(strategies)
    if eff is None:
        eff = derive_effective_params(config)
    if mats is None:
        mats = build_state_matrices(config, eff)
    K = step_count(config.horizon, dt)
    workers = max(1, int(workers))
    n_chunks = int(math.ceil(n_paths / chunk_size))
    if max_memory_mb is not None:
        need = estimate_chunk_bytes(config, dt, min(chunk_size, n_paths)) \
            * min(workers, n_chunks)
        if need > max_memory_mb * 2 ** 20:
            msg_format = (
                'run needs about {0:.0f} MB, above max_memory_mb={1}; '
                'reduce chunk_size or workers'
            )
            raise ResourceError(msg_format.format(need / 2 ** 20, max_memory_mb))
    noise = BrownianSequence(n_paths, K, dt, seed, dims=3)
    log.info(
        'Monte Carlo: %d paths, %d strategies, dt=%g, seed=%d, workers=%d',
        n_paths, len(items), dt, seed, workers,
    )

    def run_chunk(c):
        start = c * chunk_size
        stop = min(n_paths, start + chunk_size)
        dB = noise.block(start, stop)
        out = {}
        for name, strategy in items:
            path = _euler(strategy, mats, config, dt, dB, first_path=start)
            cols = _outcome_columns(path, mats, eff, config)
            pos_sum = np.sum(path.position, axis=0)
            kept = None
            if start < keep_paths:
                n_keep = min(keep_paths, stop) - start
                kept = SimPath(
                    times=path.times, state=path.state[:n_keep],
                    rate=path.rate[:n_keep], price=path.price[:n_keep],
                    traded_price=path.traded_price[:n_keep],
                    brownian=path.brownian[:n_keep], config=config,
                )
            out[name] = (cols, pos_sum, kept)
        log.debug('chunk %d: paths %d..%d done', c, start, stop - 1)
        return out

    if workers == 1 or n_chunks == 1:
        parts = [run_chunk(c) for c in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, range(n_chunks)))

    names = tuple(name for name, _ in items)
    columns, mean_position, kept_paths = {}, {}, {}
    for name in names:
        columns[name] = {
            f: np.concatenate([p[name][0][f] for p in parts])
            for f in OUTCOME_FIELDS
        }
        total = np.zeros(K + 1)
        for p in parts:
            total = total + p[name][1]
        mean_position[name] = total / n_paths
        kept = [p[name][2] for p in parts if p[name][2] is not None]
        if kept:
            kept_paths[name] = SimPath(
                times=kept[0].times,
                state=np.concatenate([k.state for k in kept]),
                rate=np.concatenate([k.rate for k in kept]),
                price=np.concatenate([k.price for k in kept]),
                traded_price=np.concatenate([k.traded_price for k in kept]),
                brownian=np.concatenate([k.brownian for k in kept]),
                config=config,
            )
    return SimResult(
        strategies=names, columns=columns, mean_position=mean_position,
        kept_paths=kept_paths, times=np.linspace(0.0, K * dt, K + 1),
        seed=int(seed), n_paths=int(n_paths), dt=float(dt),
    )


def paired_difference(result, a, b, field='objective_lq', alpha=0.05):
    """
    Compare strategies a and b path by path.

    Returns a PairedDifference with the mean and standard error of
    field(a) - field(b), its z statistic and the one-sided p-value
    for mean > 0.

    Exceptions
    ----------
    * SampleError - with fewer than two paths.

    """
    d = result.column(a, field) - result.column(b, field)
    n = d.size
    if n < 2:
        raise SampleError('paired difference needs n >= 2, got {0}'.format(n))
    mean = float(np.mean(d))
    se = float(np.std(d, ddof=1) / math.sqrt(n))
    if se > 0:
        z = mean / se
    else:
        z = math.copysign(math.inf, mean) if mean != 0 else 0.0
    p_value = float(stats.norm.sf(z))
    return PairedDifference(
        a=a, b=b, field=field, n=n, mean=mean, se=se, z=z,
        p_value=p_value, significant=p_value < alpha,
    )


def dominance_table(result, reference, field='objective_lq', alpha=0.05):
    """Paired differences of reference against every other strategy"""
    return [
        paired_difference(result, reference, other, field, alpha)
        for other in result.strategies if other != reference
    ]


def _write_csv(path, rows):
    try:
        with open(path, 'w', newline='', encoding='utf-8') as f:
            csv.writer(f, lineterminator='\r\n').writerows(rows)
    except OSError as e:
        raise OutputError('cannot write {0}: {1}'.format(path, e)) from e


def outcome_rows(result):
    """Yield the CSV header, then one row per strategy and path"""
    yield ['strategy', 'path'] + list(OUTCOME_FIELDS)
    for name in result.strategies:
        cols = result.columns[name]
        for i in range(result.n_paths):
            yield [name, i] + [repr(float(cols[f][i])) for f in OUTCOME_FIELDS]


def write_outcomes_csv(result, path):
    _write_csv(path, outcome_rows(result))


def write_paths_csv(result, path):
    """
    Write the kept paths, one row per strategy, path and time step:
    t, Q_1..Q_n, X, v, S, S~ (v and S~ are empty at T).

    """
    def rows():
        header = None
        for name, sp in result.kept_paths.items():
            n = sp.state.shape[2] - 1
            if header is None:
                header = ['strategy', 'path', 't']
                header += ['Q_{0}'.format(i + 1) for i in range(n)]
                header += ['X', 'v', 'S', 'S_traded']
                yield header
            K = sp.rate.shape[1]
            for p in range(sp.state.shape[0]):
                for k, t in enumerate(sp.times):
                    row = [name, p, repr(float(t))]
                    row += [repr(float(q)) for q in sp.state[p, k]]
                    if k < K:
                        row += [repr(float(sp.rate[p, k]))]
                    else:
                        row += ['']
                    row.append(repr(float(sp.price[p, k])))
                    row.append(repr(float(sp.traded_price[p, k])) if k < K else '')
                    yield row
    _write_csv(path, rows())


def write_trajectories_csv(result, expected, path):
    """
    Write the expected (noise-free) trajectories of X next to the
    Monte Carlo mean of X, one column each per strategy.

    * expected - {name: SimPath} from expected_path().

    """
    names = list(result.strategies)
    header = ['t']
    header += ['expected_{0}'.format(n) for n in names if n in expected]
    header += ['mean_{0}'.format(n) for n in names]

    def rows():
        yield header
        for k, t in enumerate(result.times):
            row = [repr(float(t))]
            row += [
                repr(float(expected[n].position[0, k]))
                for n in names if n in expected
            ]
            row += [repr(float(result.mean_position[n][k])) for n in names]
            yield row
    _write_csv(path, rows())
