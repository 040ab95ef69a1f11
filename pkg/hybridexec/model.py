"""
Model parameters and the linear-quadratic state-space form

This module houses the market description (market makers, impact,
price and trader parameters), the effective coefficients obtained
after folding the quadratic-variation penalty into the objective, and
the state matrices of the (n+1)-dimensional controlled system

  dx(u) = (A x(u) + a v(u) + b) du + Sigma dB(u),   x = (Q_1..Q_n, X)

where Q_i is the inventory of market maker i and X is the trader's
remaining position.

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
import json
import logging
import math
import numbers
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from hybridexec.errors import ConfigError, OutputError, ValidationError

log = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-12

# Classes
#
@dataclass(frozen=True)
class MarketMakerSpec:
    """
    Inventory dynamics of a single market maker.

    Fields
    ------
    * theta - mean-reversion rate, 1/time, theta > 0.
    * sigma_q - inventory volatility, shares/sqrt(time), >= 0.
    * qbar1 - feedback coefficient of the long-term mean on the
      trading rate, dimensionless.
    * qbar0 - upfront capacity, shares.
    * weight - relative importance in the aggregate inventory, > 0.

    """
    theta: float
    sigma_q: float = 0.0
    qbar1: float = 0.0
    qbar0: float = 0.0
    weight: float = 1.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            val = getattr(self, f.name)
            if isinstance(val, bool) or not isinstance(val, numbers.Real):
                msg = 'maker field {0} must be a number, got {1!r}'.format(
                    f.name, val
                )
                raise ConfigError(msg)
            object.__setattr__(self, f.name, float(val))


@dataclass(frozen=True)
class MarketConfig:
    """
    Full problem description.

    The risk-aversion field is named lam because lambda is reserved;
    in JSON documents it is spelt out as "lambda".

    Notes
    -----
    Construction only checks types. Model conditions such as
    beta > gamma/2 are checked by validate_config(), so that
    invalid configurations can still be described and reported.

    """
    makers: Tuple[MarketMakerSpec, ...]
    gamma: float
    eta: float
    phi: float
    mu: float
    sigma_s: float
    s0: float
    x0: float
    m: float
    horizon: float
    beta: float
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'makers', tuple(self.makers))
        for mk in self.makers:
            if not isinstance(mk, MarketMakerSpec):
                msg = 'makers must be MarketMakerSpec, not {0}'.format(
                    type(mk).__name__
                )
                raise ConfigError(msg)
        for f in dataclasses.fields(self):
            if f.name == 'makers':
                continue
            val = getattr(self, f.name)
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                msg = 'field {0} must be a number, got {1!r}'.format(
                    f.name, val
                )
                raise ConfigError(msg)
            object.__setattr__(self, f.name, float(val))

    @property
    def n(self):
        """Number of market makers"""
        return len(self.makers)

    @property
    def thetas(self):
        return np.array([mk.theta for mk in self.makers], dtype=float)

    @property
    def weights(self):
        return np.array([mk.weight for mk in self.makers], dtype=float)

    @property
    def sigma_qs(self):
        return np.array([mk.sigma_q for mk in self.makers], dtype=float)

    @property
    def qbar0s(self):
        return np.array([mk.qbar0 for mk in self.makers], dtype=float)

    @property
    def qbar1s(self):
        return np.array([mk.qbar1 for mk in self.makers], dtype=float)

    @property
    def initial_state(self):
        """The state (0,...,0, x0) at time zero"""
        x = np.zeros(self.n + 1)
        x[-1] = self.x0
        return x

    def replace(self, **changes):
        """Return a copy with the named fields changed"""
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class EffectiveParams:
    """
    Coefficients of the LQ objective after the quadratic-variation
    penalty has been folded in.

    zeta is None when psi == 0 (in particular when lam == 0).

    """
    eta_tilde: float
    xi_tilde: float
    psi: float
    sigma_qm: float
    zeta: Optional[float] = None


@dataclass(frozen=True, eq=False)
class StateMatrices:
    """
    Matrices of the (n+1)-dimensional state equation and the LQ
    objective. All arrays are read-only.

    """
    A: np.ndarray
    a: np.ndarray
    b: np.ndarray
    Sigma: np.ndarray
    G: np.ndarray
    k: np.ndarray
    Theta: np.ndarray
    e_last: np.ndarray

    def __post_init__(self):
        for f in dataclasses.fields(self):
            getattr(self, f.name).setflags(write=False)

    @property
    def dim(self):
        """Dimension n+1 of the state"""
        return self.a.shape[0]

    @property
    def n(self):
        return self.a.shape[0] - 1


@dataclass(frozen=True)
class Check:
    """One line of a validation report"""
    name: str
    passed: bool
    required: bool
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """
    Outcome of validate_config().

    * ok - True when every required check passed.
    * closed_form_available - True when the closed-form trading
      rates may be used in addition to the generic feedback.

    """
    checks: Tuple[Check, ...] = field(default_factory=tuple)

    @property
    def ok(self):
        return all(c.passed for c in self.checks if c.required)

    @property
    def closed_form_available(self):
        return self.ok and all(c.passed for c in self.checks)

    def failed(self, required_only=False):
        return tuple(
            c for c in self.checks
            if not c.passed and (c.required or not required_only)
        )

    def raise_for_failures(self):
        """Raise ValidationError if any required check failed"""
        if not self.ok:
            raise ValidationError(self.failed(required_only=True))

    def to_dict(self):
        return {
            'ok': self.ok,
            'closed_form_available': self.closed_form_available,
            'checks': [dataclasses.asdict(c) for c in self.checks],
        }


# Functions
#
def gamma_weights(n, shape=3.0):
    """
    Return n weights proportional to the gamma probability density
    with the given shape and unit scale, evaluated at 1, 2, ..., n,
    normalised to sum to one.

    Required Arguments
    ------------------
    * n - number of weights. Accepts int, n >= 1.

    Optional Arguments
    ------------------
    * shape - gamma shape parameter, > 0. Default is 3.

    Examples
    --------
    ::

      >>> w = gamma_weights(10)
      >>> int(np.argmax(w)) + 1
      2

    """
    if n < 1:
        raise ValueError('n must be >= 1, got {0}'.format(n))
    if shape <= 0:
        raise ValueError('shape must be > 0, got {0}'.format(shape))
    dens = stats.gamma.pdf(np.arange(1, n + 1, dtype=float), a=shape)
    return dens / dens.sum()


def generate_makers(
    n, theta_rule='linear', weight_shape=3.0, qbar_rule='table1',
    sigma_q=0.1
):
    """
    Build a spectrum of n market makers.

    Optional Arguments
    ------------------
    * theta_rule - only 'linear' (theta_i = i) is supported.
    * weight_shape - shape of the gamma weights.
    * qbar_rule - 'table1' gives qbar0_i = 1/(10 theta_i) and
      qbar1_i = 1/(100 theta_i); 'table1_no_feedback' is the same with
      qbar1_i = 0; 'zero' sets both to zero.
    * sigma_q - inventory volatility shared by all makers.

    """
    if theta_rule != 'linear':
        raise ConfigError('unknown theta_rule: {0!r}'.format(theta_rule))
    weights = gamma_weights(n, weight_shape)
    makers = []
    for i in range(1, n + 1):
        theta = float(i)
        if qbar_rule == 'table1':
            qbar0, qbar1 = 1.0 / (10 * theta), 1.0 / (100 * theta)
        elif qbar_rule == 'table1_no_feedback':
            qbar0, qbar1 = 1.0 / (10 * theta), 0.0
        elif qbar_rule == 'zero':
            qbar0, qbar1 = 0.0, 0.0
        else:
            raise ConfigError('unknown qbar_rule: {0!r}'.format(qbar_rule))
        makers.append(MarketMakerSpec(
            theta=theta, sigma_q=float(sigma_q), qbar1=qbar1, qbar0=qbar0,
            weight=float(weights[i - 1]),
        ))
    return tuple(makers)


def derive_effective_params(config):
    """
    Fold the quadratic-variation penalty into the LQ coefficients.

      eta_tilde = eta (1 + lam m^2 eta)
      xi_tilde  = 2 gamma lam m^2 eta
      psi       = lam (phi^2 sigma_qm^2 + m^2 gamma^2 + sigma_s^2)

    where sigma_qm is the weighted sum of the makers' volatilities.

    """
    c = config
    sigma_qm = float(np.dot(c.weights, c.sigma_qs)) if c.n else 0.0
    lam_m2 = c.lam * c.m ** 2
    eta_tilde = c.eta * (1.0 + lam_m2 * c.eta)
    xi_tilde = 2.0 * c.gamma * lam_m2 * c.eta
    psi = c.lam * (
        (c.phi * sigma_qm) ** 2 + (c.m * c.gamma) ** 2 + c.sigma_s ** 2
    )
    zeta = math.sqrt(psi / eta_tilde) if psi > 0 else None
    return EffectiveParams(
        eta_tilde=eta_tilde, xi_tilde=xi_tilde, psi=psi,
        sigma_qm=sigma_qm, zeta=zeta,
    )


def build_state_matrices(config, eff):
    """
    Assemble the state-space matrices.

    Returns a StateMatrices with

    * A - diag(-theta_1, ..., -theta_n, 0)
    * a - (theta_1 qbar1_1, ..., theta_n qbar1_n, -1)
    * b - (theta_1 qbar0_1, ..., theta_n qbar0_n, 0)
    * Sigma - (n+1) x 2, maker volatilities in column one and m in the
      bottom entry of column two
    * G - terminal cost, -phi nu_i / 2 on the last row and column,
      gamma/2 - beta in the corner
    * k - (-phi nu_1, ..., -phi nu_n, -xi_tilde) / 2

    """
    n = config.n
    thetas = config.thetas
    weights = config.weights
    A = np.diag(np.append(-thetas, 0.0))
    a = np.append(thetas * config.qbar1s, -1.0)
    b = np.append(thetas * config.qbar0s, 0.0)
    Sigma = np.zeros((n + 1, 2))
    Sigma[:n, 0] = config.sigma_qs
    Sigma[n, 1] = config.m
    G = np.zeros((n + 1, n + 1))
    coupling = -0.5 * config.phi * weights
    G[:n, n] = coupling
    G[n, :n] = coupling
        # same values assigned to both sides, so G is exactly symmetric
    G[n, n] = 0.5 * config.gamma - config.beta
    k = 0.5 * np.append(-config.phi * weights, -eff.xi_tilde)
    e_last = np.zeros(n + 1)
    e_last[n] = 1.0
    return StateMatrices(
        A=A, a=a, b=b, Sigma=Sigma, G=G, k=k, Theta=np.diag(thetas),
        e_last=e_last,
    )


def validate_config(config):
    """
    Check a MarketConfig against the model conditions.

    Required checks: sign constraints of every parameter, weight
    normalisation and beta > gamma/2. Informational checks, needed
    only for the closed-form trading rates: the closed-form
    conditions on beta, gamma, xi_tilde, psi and eta_tilde, and the
    absence of rate feedback in the makers' long-term means
    (all qbar1 == 0).

    Returns a ValidationReport; call raise_for_failures() on it to
    turn failed required checks into a ValidationError.

    """
    c = config
    checks = []

    bad = []
    for name in ('eta', 'sigma_s', 's0', 'x0', 'horizon', 'beta'):
        if not getattr(c, name) > 0:
            bad.append('{0}={1} (must be > 0)'.format(name, getattr(c, name)))
    for name in ('gamma', 'phi', 'mu', 'm', 'lam'):
        if not getattr(c, name) >= 0:
            bad.append('{0}={1} (must be >= 0)'.format(name, getattr(c, name)))
    for i, mk in enumerate(c.makers):
        if not mk.theta > 0:
            bad.append('makers[{0}].theta={1} (must be > 0)'.format(i, mk.theta))
        if not mk.weight > 0:
            bad.append('makers[{0}].weight={1} (must be > 0)'.format(i, mk.weight))
        if not mk.sigma_q >= 0:
            bad.append(
                'makers[{0}].sigma_q={1} (must be >= 0)'.format(i, mk.sigma_q)
            )
    checks.append(Check(
        'sign_constraints', not bad, True,
        '; '.join(bad) if bad else 'all parameters within range',
    ))

    if c.n:
        total = float(np.sum(c.weights))
        ok = abs(total - 1.0) <= WEIGHT_SUM_TOL
        checks.append(Check(
            'weights_normalized', ok, True,
            'sum of weights is {0!r}'.format(total),
        ))

    ok = c.beta > c.gamma / 2
    checks.append(Check(
        'beta_gt_half_gamma', ok, True,
        'beta={0} must exceed gamma/2={1}'.format(c.beta, c.gamma / 2),
    ))

    eff = derive_effective_params(c)
    margin = c.beta - (c.gamma + eff.xi_tilde) / 2
    if c.lam > 0:
        ok = margin > 0 and margin ** 2 > eff.psi * eff.eta_tilde
        msg = (
            'beta - (gamma+xi_tilde)/2 = {0:.6g}, its square {1:.6g} '
            'must exceed psi*eta_tilde = {2:.6g}'
        ).format(margin, margin ** 2, eff.psi * eff.eta_tilde)
    else:
        ok = margin > 0
        msg = 'beta - gamma/2 = {0:.6g} must be > 0'.format(margin)
    checks.append(Check('closed_form_conditions', ok, False, msg))

    nonzero = [i for i, mk in enumerate(c.makers) if mk.qbar1 != 0]
    checks.append(Check(
        'no_rate_feedback', not nonzero, False,
        'qbar1 != 0 for makers {0}'.format(nonzero) if nonzero
        else 'all qbar1 are zero',
    ))
    report = ValidationReport(tuple(checks))
    if not report.ok:
        log.info('configuration failed validation: %s', report.failed(True))
    return report


# Configuration Documents
#
_MARKET_KEYS = {
    'makers', 'gamma', 'eta', 'phi', 'mu', 'sigma_s', 's0', 'x0', 'm',
    'horizon', 'beta', 'lambda',
}
_MAKER_KEYS = {'theta', 'sigma_q', 'qbar1', 'qbar0', 'weight'}
_GENERATOR_KEYS = {'n', 'theta_rule', 'weight_shape', 'qbar_rule', 'sigma_q'}


def _check_keys(doc, allowed, where):
    if not isinstance(doc, dict):
        raise ConfigError('{0} must be a JSON object'.format(where))
    unknown = sorted(set(doc) - allowed)
    if unknown:
        msg = 'unknown key(s) in {0}: {1}'.format(where, ', '.join(unknown))
        raise ConfigError(msg)


def makers_from_doc(doc):
    """
    Build the maker tuple from either an explicit list of maker
    objects or a generator object with key "n".

    """
    if isinstance(doc, list):
        out = []
        for i, item in enumerate(doc):
            _check_keys(item, _MAKER_KEYS, 'market.makers[{0}]'.format(i))
            if 'theta' not in item:
                msg = 'market.makers[{0}] is missing theta'.format(i)
                raise ConfigError(msg)
            out.append(MarketMakerSpec(**item))
        return tuple(out)
    _check_keys(doc, _GENERATOR_KEYS, 'market.makers')
    if 'n' not in doc:
        raise ConfigError('market.makers generator needs key "n"')
    return generate_makers(
        int(doc['n']),
        theta_rule=doc.get('theta_rule', 'linear'),
        weight_shape=float(doc.get('weight_shape', 3.0)),
        qbar_rule=doc.get('qbar_rule', 'table1'),
        sigma_q=float(doc.get('sigma_q', 0.1)),
    )


def market_from_dict(doc):
    """Build a MarketConfig from a parsed JSON object"""
    _check_keys(doc, _MARKET_KEYS, 'market')
    missing = sorted(_MARKET_KEYS - set(doc) - {'lambda'})
    if missing:
        msg = 'market is missing key(s): {0}'.format(', '.join(missing))
        raise ConfigError(msg)
    kwargs = {k: v for k, v in doc.items() if k not in ('makers', 'lambda')}
    kwargs['lam'] = doc.get('lambda', 0.0)
    try:
        return MarketConfig(makers=makers_from_doc(doc['makers']), **kwargs)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def market_to_dict(config):
    """Inverse of market_from_dict(), with makers listed explicitly"""
    doc = dataclasses.asdict(config)
    doc['lambda'] = doc.pop('lam')
    doc['makers'] = [dict(mk) for mk in doc['makers']]
    return doc


def merge_dicts(base, override):
    """
    Recursively merge override into a copy of base. Nested objects
    are merged, everything else is replaced.

    """
    out = dict(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = merge_dicts(out[key], val)
        else:
            out[key] = val
    return out


def read_json(path):
    """
    Load a JSON document from path.

    Exceptions
    ----------
    * OutputError - when the file cannot be opened (I/O failure).
    * ConfigError - when the file is not valid JSON.

    """
    try:
        with open(path, encoding='utf-8') as f:
            return json.load(f)
    except OSError as e:
        raise OutputError('cannot read config file {0}: {1}'.format(
            path, e.strerror or e
        )) from e
    except json.JSONDecodeError as e:
        raise ConfigError('{0} is not valid JSON: {1}'.format(path, e)) from e


def load_market_config(path, variant=None):
    """
    Load the market section of a config file, applying the named
    variant if given.

    """
    doc = read_json(path)
    market = doc.get('market', doc)
    if variant is not None:
        variants = doc.get('variants', {})
        if variant not in variants:
            msg = 'variant {0!r} not found; available: {1}'.format(
                variant, ', '.join(sorted(variants)) or 'none'
            )
            raise ConfigError(msg)
        override = {
            k: v for k, v in variants[variant].items() if k != 'strategies'
        }
        market = merge_dicts(market, override)
    return market_from_dict(market)
