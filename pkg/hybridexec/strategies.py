"""
Trading rates: optimal feedback, closed forms and benchmarks

Every strategy is an object with a rate(t, states) method, taking a
time and an array of states of shape (P, n+1) (one row per simulated
path, Q_1..Q_n then X) and returning P trading rates in shares per
unit time. Positive rates sell.

Strategies are immutable after construction, so the same object may
be evaluated from several worker threads.

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

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from hybridexec.errors import NumericalWarning, PreconditionError
from hybridexec.model import build_state_matrices, derive_effective_params

log = logging.getLogger(__name__)

RESONANCE_TOL = 1e-8
RESONANCE_SHIFT = 1e-6

STRATEGY_NAMES = (
    'optimal', 'closed_form_risk_averse', 'closed_form_risk_neutral',
    'twap', 'adapted_twap', 'almgren_chriss',
)

# Hyperbolic Helpers
#
# Ratios of hyperbolic functions are evaluated through exponentials of
# differences, so that large arguments do not overflow.
#
def _sinh_ratio(a, b):
    """sinh(a)/sinh(b) for a, b > 0"""
    return np.exp(a - b) * np.expm1(-2 * a) / np.expm1(-2 * b)


def _cosh_sinh_ratio(a, b):
    """cosh(a)/sinh(b) for a >= 0, b > 0"""
    return np.exp(a - b) * (1 + np.exp(-2 * a)) / -np.expm1(-2 * b)


def _coth(x):
    return 1.0 / np.tanh(x)


# Classes
#
@dataclass(frozen=True, eq=False)
class ClosedFormCoefficients:
    """
    Constants of the risk-averse closed-form rate, computed once per
    configuration.

    Theta and the resolvent (I - Theta^2/zeta^2)^-1 are diagonal and
    stored as vectors (thetas, resolvent).

    """
    alpha_tilde: float
    zeta: float
    thetas: np.ndarray
    resolvent: np.ndarray
    weights: np.ndarray
    qbar0: np.ndarray
    horizon: float
    eta_tilde: float
    psi: float

    @property
    def Theta(self):
        return np.diag(self.thetas)


class StrategySpec:
    """
    Base of all strategies.

    Subclasses set kind and implement rate(). A strategy whose rate
    ignores the state (open loop) sets open_loop to True.

    """
    __slots__ = ()
    kind = None
    open_loop = False

    def rate(self, t, states):
        raise NotImplementedError

    def __call__(self, t, states):
        return self.rate(t, states)

    def _get_args(self):
        return ''

    def __repr__(self):
        return '{0}({1})'.format(type(self).__name__, self._get_args())


class OptimalFeedback(StrategySpec):
    """
    The optimal affine feedback

      v(u) = (2(k + R(u)a)'x + a'r(u)) / (2 eta_tilde)

    with gains precomputed at every grid point of the solution and
    interpolated linearly in between.

    """
    __slots__ = ('_sol', '_gains', '_offsets')
    kind = 'optimal_feedback'

    def __init__(self, sol, mats, eff):
        self._sol = sol
        self._gains = (mats.k[None, :] + sol.R @ mats.a) / eff.eta_tilde
        self._offsets = (sol.r @ mats.a) / (2.0 * eff.eta_tilde)

    def rate(self, t, states):
        j, w = self._sol.locate(t)
        if w == 0.0:
            gain, offset = self._gains[j], self._offsets[j]
        else:
            gain = (1 - w) * self._gains[j] + w * self._gains[j + 1]
            offset = (1 - w) * self._offsets[j] + w * self._offsets[j + 1]
        return np.asarray(states, dtype=float) @ gain + offset

    def _get_args(self):
        return 'method={0!r}, grid_points={1}'.format(
            self._sol.method, len(self._sol.grid)
        )


class ClosedFormRiskAverse(StrategySpec):
    """Closed-form optimal rate for lam > 0 and no rate feedback"""
    __slots__ = ('coeffs', 'eff', 'mu', 'phi')
    kind = 'closed_form_risk_averse'

    def __init__(self, coeffs, eff, mu, phi):
        self.coeffs = coeffs
        self.eff = eff
        self.mu = mu
        self.phi = phi

    def rate(self, t, states):
        states = np.asarray(states, dtype=float)
        return closed_form_rate_risk_averse(
            t, states[..., :-1], states[..., -1], self.coeffs, self.eff,
            self.mu, self.phi,
        )

    def _get_args(self):
        return 'alpha_tilde={0!r}, zeta={1!r}'.format(
            self.coeffs.alpha_tilde, self.coeffs.zeta
        )


class ClosedFormRiskNeutral(StrategySpec):
    """Closed-form optimal rate for lam == 0 and no rate feedback"""
    __slots__ = ('config', 'alpha')
    kind = 'closed_form_risk_neutral'

    def __init__(self, config, alpha=None):
        check_risk_neutral_preconditions(config)
        self.config = config
        self.alpha = adapted_alpha(config) if alpha is None else alpha

    def rate(self, t, states):
        states = np.asarray(states, dtype=float)
        return closed_form_rate_risk_neutral(
            t, states[..., :-1], states[..., -1], self.config,
            alpha=self.alpha,
        )

    def _get_args(self):
        return 'alpha={0!r}'.format(self.alpha)


class TWAP(StrategySpec):
    """Constant rate x0/T"""
    __slots__ = ('speed',)
    kind = 'twap'
    open_loop = True

    def __init__(self, config):
        self.speed = twap_rate(config)

    def rate(self, t, states):
        return np.full(np.shape(states)[:-1], self.speed)

    def _get_args(self):
        return 'speed={0!r}'.format(self.speed)


class AdaptedTWAP(StrategySpec):
    """TWAP recomputed on the remaining position, v = X/(T-t+alpha)"""
    __slots__ = ('alpha', 'horizon')
    kind = 'adapted_twap'

    def __init__(self, alpha, horizon):
        if not alpha > 0:
            raise PreconditionError('alpha must be > 0, got {0}'.format(alpha))
        self.alpha = alpha
        self.horizon = horizon

    def rate(self, t, states):
        X = np.asarray(states, dtype=float)[..., -1]
        return adapted_twap_rate(t, X, self.alpha, self.horizon)

    def _get_args(self):
        return 'alpha={0!r}, horizon={1!r}'.format(self.alpha, self.horizon)


class AlmgrenChriss(StrategySpec):
    """Deterministic schedule x0 sinh(kappa(T-t))/sinh(kappa T)"""
    __slots__ = ('config', 'kappa')
    kind = 'almgren_chriss'
    open_loop = True

    def __init__(self, config):
        self.config = config
        self.kappa = ac_kappa(config)

    def rate(self, t, states):
        return np.full(np.shape(states)[:-1], ac_rate(t, self.config))

    def _get_args(self):
        return 'kappa={0!r}'.format(self.kappa)


# Functions
#
def tilde_alpha(eff, gamma, beta):
    """
    Return the time shift alpha_tilde of the risk-averse closed form,

      alpha_tilde = (1/zeta) asinh(sqrt(psi eta_tilde) / sqrt(D))

    with D = (beta - (gamma + xi_tilde)/2)^2 - psi eta_tilde, so that
    sinh(zeta alpha_tilde) = sqrt(psi eta_tilde)/sqrt(D) and
    cosh(zeta alpha_tilde) = (beta - (gamma + xi_tilde)/2)/sqrt(D).

    Exceptions
    ----------
    * PreconditionError - when psi == 0, beta <= (gamma + xi_tilde)/2
      or D <= 0. The generic feedback remains available.

    """
    if eff.psi <= 0 or eff.zeta is None:
        raise PreconditionError(
            'closed-form risk-averse rate needs lambda > 0 (psi > 0)'
        )
    margin = beta - (gamma + eff.xi_tilde) / 2
    disc = margin * margin - eff.psi * eff.eta_tilde
    if not margin > 0:
        msg_format = 'beta - (gamma+xi_tilde)/2 = {0:.6g} must be > 0'
        raise PreconditionError(msg_format.format(margin))
    if not disc > 0:
        msg_format = (
            '(beta - (gamma+xi_tilde)/2)^2 - psi*eta_tilde = {0:.6g} '
            'must be > 0'
        )
        raise PreconditionError(msg_format.format(disc))
    return math.asinh(math.sqrt(eff.psi * eff.eta_tilde / disc)) / eff.zeta


def closed_form_coefficients(config, eff=None):
    """
    Precompute ClosedFormCoefficients for config.

    When some theta_i is within a relative 1e-8 of zeta, the
    resolvent is singular; that theta_i is shifted by 1e-6 zeta and a
    NumericalWarning is issued.

    Exceptions
    ----------
    * PreconditionError - when lam == 0, some qbar1 != 0, or the
      conditions of tilde_alpha() fail.

    """
    if eff is None:
        eff = derive_effective_params(config)
    if config.lam <= 0:
        raise PreconditionError('closed-form risk-averse rate needs lambda > 0')
    nonzero = [i for i, mk in enumerate(config.makers) if mk.qbar1 != 0]
    if nonzero:
        msg = 'closed-form rate needs qbar1 == 0; nonzero for makers {0}'
        raise PreconditionError(msg.format(nonzero))
    alpha_tilde = tilde_alpha(eff, config.gamma, config.beta)
    zeta = eff.zeta
    thetas = config.thetas.copy()
    near = np.abs(thetas - zeta) < RESONANCE_TOL * zeta
    if np.any(near):
        msg = 'theta within tolerance of zeta={0:.6g} for makers {1}; shifted'
        msg = msg.format(zeta, list(np.flatnonzero(near)))
        log.warning(msg)
        warnings.warn(msg, NumericalWarning, stacklevel=2)
        thetas[near] += RESONANCE_SHIFT * zeta
    return ClosedFormCoefficients(
        alpha_tilde=alpha_tilde, zeta=zeta, thetas=thetas,
        resolvent=1.0 / (1.0 - (thetas / zeta) ** 2),
        weights=config.weights, qbar0=config.qbar0s,
        horizon=config.horizon, eta_tilde=eff.eta_tilde, psi=eff.psi,
    )


def _lambda_diagonals(u, T, coeffs):
    z, at = coeffs.zeta, coeffs.alpha_tilde
    th, res = coeffs.thetas, coeffs.resolvent
    tau = T - u
    s = z * (tau + at)
    decay = np.exp(-tau * th)
    rho = _sinh_ratio(z * at, s)
    coth_s = _coth(s)
    K = 1.0 - res + res * th * _coth(z * at) / z
    lam_u = rho * decay * K + res - res * th * coth_s / z
    # (cosh s - cosh(z at)) / sinh s, in product form
    bracket = 2.0 * np.sinh(0.5 * (s + z * at)) * np.sinh(0.5 * (s - z * at)) \
        / np.sinh(s) if s < 350 else coth_s - _cosh_sinh_ratio(z * at, s)
    lam_0 = rho * (1.0 - decay) * K + res * th * bracket / z \
        - res * th * th * (1.0 - rho) / (z * z)
    return lam_u, lam_0


def lambda_matrices(u, T, coeffs):
    """
    Return the n x n matrices (Lambda_u(T), Lambda0_u(T)) of the
    risk-averse closed form. Both are diagonal.

    With tau = T - u, s = zeta(tau + alpha_tilde), Res the resolvent
    and K = I - Res + Res Theta coth(zeta alpha_tilde)/zeta:

      Lambda_u  = sinh(zeta alpha_tilde)/sinh(s) e^{-tau Theta} K
                  + Res - Res Theta coth(s)/zeta

      Lambda0_u = sinh(zeta alpha_tilde)/sinh(s) (I - e^{-tau Theta}) K
                  + Res Theta (coth(s) - cosh(zeta alpha_tilde)/sinh(s))/zeta
                  - Res Theta^2 (1 - sinh(zeta alpha_tilde)/sinh(s))/zeta^2

    At u == T these reduce to (I, 0).

    """
    if not 0 <= u <= T:
        raise PreconditionError('u={0} outside [0, {1}]'.format(u, T))
    lam_u, lam_0 = _lambda_diagonals(u, T, coeffs)
    return np.diag(lam_u), np.diag(lam_0)


def closed_form_rate_risk_averse(u, Q, X, coeffs, eff, mu, phi):
    """
    Optimal rate in closed form for lam > 0 and qbar1 == 0:

      v = zeta coth(s) X - (phi/2 eta_tilde) nu'Q
          + (phi/2 eta_tilde) nu'(Lambda_u Q + Lambda0_u qbar0)
          + (mu / 2 sqrt(psi eta_tilde))
            (cosh(zeta alpha_tilde)/sinh(s) - coth(s))

    where s = zeta(T - u + alpha_tilde).

    Q may be an (n,) vector or a (P, n) array; X a scalar or (P,)
    array.

    """
    T = coeffs.horizon
    z, at = coeffs.zeta, coeffs.alpha_tilde
    Q = np.asarray(Q, dtype=float)
    X = np.asarray(X, dtype=float)
    s = z * (T - u + at)
    coth_s = _coth(s)
    lam_u, lam_0 = _lambda_diagonals(u, T, coeffs)
    nu = coeffs.weights
    c = phi / (2.0 * eff.eta_tilde)
    inventory = c * (Q @ (nu * (lam_u - 1.0)) + np.dot(nu * lam_0, coeffs.qbar0))
    drift = mu / (2.0 * math.sqrt(eff.psi * eff.eta_tilde)) \
        * (_cosh_sinh_ratio(z * at, s) - coth_s)
    return z * coth_s * X + inventory + drift


def check_risk_neutral_preconditions(config):
    """Raise PreconditionError unless lam == 0, qbar1 == 0 and theta > 0"""
    if config.lam != 0:
        raise PreconditionError('closed-form risk-neutral rate needs lambda == 0')
    nonzero = [i for i, mk in enumerate(config.makers) if mk.qbar1 != 0]
    if nonzero:
        msg = 'closed-form rate needs qbar1 == 0; nonzero for makers {0}'
        raise PreconditionError(msg.format(nonzero))
    if np.any(config.thetas <= 0):
        raise PreconditionError('Theta must be invertible (all theta > 0)')
    if not config.beta > config.gamma / 2:
        raise PreconditionError('beta must exceed gamma/2')


def closed_form_rate_risk_neutral(u, Q, X, config, alpha=None):
    """
    Optimal rate in closed form for lam == 0 and qbar1 == 0:

      v = (phi/2 eta)(nu'qbar0 - nu'Q)
          + (phi/2 eta) nu'[alpha E + (I - E) Theta^-1](Q - qbar0)/(tau + alpha)
          + X/(tau + alpha) - (mu/4 eta)(tau + alpha - alpha^2/(tau + alpha))

    with tau = T - u, E = exp(-tau Theta) and alpha = 2 eta/(2 beta - gamma).

    """
    check_risk_neutral_preconditions(config)
    if alpha is None:
        alpha = adapted_alpha(config)
    eta, phi, mu = config.eta, config.phi, config.mu
    tau = config.horizon - u
    span = tau + alpha
    th = config.thetas
    nu = config.weights
    qbar0 = config.qbar0s
    E = np.exp(-tau * th)
    # (1 - E)/theta, accurate for small tau*theta
    lag = -np.expm1(-tau * th) / th
    Q = np.asarray(Q, dtype=float)
    X = np.asarray(X, dtype=float)
    dev = Q - qbar0
    c = phi / (2.0 * eta)
    inventory = -c * (dev @ nu) + c * (dev @ (nu * (alpha * E + lag))) / span
    drift = (mu / (4.0 * eta)) * (span - alpha * alpha / span)
    return inventory + X / span - drift


def feedback_rate(u, state, sol, mats, eff):
    """
    Return the optimal feedback rate at time u for state (or an array
    of states with the state index last),

      v = (2(k + R(u)a)'x + a'r(u)) / (2 eta_tilde)

    with R and r linearly interpolated from sol.

    """
    R, r, _ = sol.coefficients(u)
    gain = (mats.k + R @ mats.a) / eff.eta_tilde
    return np.asarray(state, dtype=float) @ gain + (mats.a @ r) / (2 * eff.eta_tilde)


def twap_rate(config):
    """Constant TWAP rate x0/T"""
    return config.x0 / config.horizon


def adapted_alpha(config):
    """Return alpha = 2 eta/(2 beta - gamma) of the adapted TWAP"""
    denom = 2 * config.beta - config.gamma
    if not denom > 0:
        raise PreconditionError('adapted TWAP needs beta > gamma/2')
    return 2 * config.eta / denom


def adapted_twap_rate(t, X, alpha, horizon):
    """Adapted TWAP rate X/(T - t + alpha)"""
    return np.asarray(X, dtype=float) / (horizon - t + alpha)


def ac_kappa(config):
    """
    Urgency kappa = sqrt(lam sigma_s^2 / eta) of the Almgren-Chriss
    schedule.

    """
    if not config.lam > 0:
        raise PreconditionError('Almgren-Chriss schedule needs lambda > 0')
    return math.sqrt(config.lam * config.sigma_s ** 2 / config.eta)


def ac_position(t, config):
    """
    Almgren-Chriss holdings x0 sinh(kappa(T-t))/sinh(kappa T); t may
    be an array.

    """
    kappa = ac_kappa(config)
    T = config.horizon
    tau = np.maximum(T - np.asarray(t, dtype=float), 0.0)
    out = config.x0 * _sinh_ratio(kappa * tau, kappa * T)
    return float(out) if out.ndim == 0 else out


def ac_rate(t, config):
    """Almgren-Chriss rate x0 kappa cosh(kappa(T-t))/sinh(kappa T)"""
    kappa = ac_kappa(config)
    T = config.horizon
    tau = np.maximum(T - np.asarray(t, dtype=float), 0.0)
    out = config.x0 * kappa * _cosh_sinh_ratio(kappa * tau, kappa * T)
    return float(out) if out.ndim == 0 else out


def build_strategy(name, config, mats=None, eff=None, sol=None):
    """
    Instantiate a strategy by name.

    Required Arguments
    ------------------
    * name - one of STRATEGY_NAMES.
    * config - MarketConfig.

    Optional Arguments
    ------------------
    * mats, eff, sol - StateMatrices, EffectiveParams and a complete
      RiccatiSolution; needed by 'optimal', which solves the model
      itself if sol is not given.

    Exceptions
    ----------
    * PreconditionError - when the configuration does not admit the
      strategy; the message names the violated condition.

    * ValueError - for an unknown name.

    """
    if eff is None:
        eff = derive_effective_params(config)
    if name == 'optimal':
        if mats is None:
            mats = build_state_matrices(config, eff)
        if sol is None:
            from hybridexec.riccati import make_grid, solve_riccati
            grid = make_grid(config.horizon)
            sol = solve_riccati(mats, eff, grid, mu=config.mu)
        return OptimalFeedback(sol, mats, eff)
    elif name == 'closed_form_risk_averse':
        coeffs = closed_form_coefficients(config, eff)
        return ClosedFormRiskAverse(coeffs, eff, config.mu, config.phi)
    elif name == 'closed_form_risk_neutral':
        return ClosedFormRiskNeutral(config)
    elif name == 'twap':
        return TWAP(config)
    elif name == 'adapted_twap':
        return AdaptedTWAP(adapted_alpha(config), config.horizon)
    elif name == 'almgren_chriss':
        return AlmgrenChriss(config)
    msg = 'unknown strategy {0!r}; choose from {1}'.format(
        name, ', '.join(STRATEGY_NAMES)
    )
    raise ValueError(msg)
