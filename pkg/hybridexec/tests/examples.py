"""
Shared Specimens for Automated Tests and Demos

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

import math

import numpy as np

from hybridexec.hydro import QuoteModelParams
from hybridexec.model import MarketConfig, MarketMakerSpec, \
    build_state_matrices, derive_effective_params, generate_makers

# Loose Items
#
TEN_MAKER_SCALARS = {
    'gamma': 2.5e-7, 'eta': 2.5e-6, 'phi': 2.5e-4, 'beta': 2.5e-4,
    'mu': 0.0, 'sigma_s': 0.5, 's0': 50.0, 'x0': 2e5, 'm': 2e4,
    'horizon': 1.0,
}
    # One trading day of a liquid stock; the spectrum of makers is
    # generated separately
TEN_MAKER_LAMBDAS = (0.0, 0.001)

HYDRO_PARAMS = QuoteModelParams(
    A=1.0, kappa=1.0, nu_risk=1.0, mu=0.5, sigma=1.0 / math.sqrt(2.0)
)
    # c1 = 1/4, c2 = 1, so the limit has theta = 1, qbar0 = 1 and
    # sigma_q = 1


# Test Data Helper Functions
#
def ten_maker_market(lam=0.0, feedback=True, n=10, **changes):
    """
    The ten-maker configuration, with or without rate feedback in the
    makers' long-term inventories.

    """
    rule = 'table1' if feedback else 'table1_no_feedback'
    kwargs = dict(TEN_MAKER_SCALARS, lam=lam)
    kwargs.update(changes)
    return MarketConfig(makers=generate_makers(n, qbar_rule=rule), **kwargs)


def scalar_market(lam=0.0, **changes):
    """A market without market makers; the state is X alone"""
    kwargs = dict(TEN_MAKER_SCALARS, lam=lam, phi=0.0)
    kwargs.update(changes)
    return MarketConfig(makers=(), **kwargs)


def single_maker_market(theta=3.0, **changes):
    """One market maker with unit weight and rate feedback"""
    kwargs = dict(TEN_MAKER_SCALARS)
    kwargs.update(changes)
    mk = MarketMakerSpec(
        theta=theta, sigma_q=0.1, qbar1=1.0 / (100 * theta),
        qbar0=1.0 / (10 * theta), weight=1.0,
    )
    return MarketConfig(makers=(mk,), **kwargs)


def random_market(rng, n, lam=0.0, feedback=True):
    """
    A valid configuration with n makers and randomised parameters in
    the neighbourhood of the ten-maker configuration.

    """
    thetas = np.sort(rng.uniform(0.5, 10.0, size=n))
    weights = rng.uniform(0.5, 1.5, size=n)
    weights = weights / weights.sum()
    makers = tuple(
        MarketMakerSpec(
            theta=float(th), sigma_q=float(rng.uniform(0.0, 0.2)),
            qbar1=float(rng.uniform(0.0, 0.02)) if feedback else 0.0,
            qbar0=float(rng.uniform(0.0, 0.2)), weight=float(w),
        )
        for th, w in zip(thetas, weights)
    )
    kwargs = dict(TEN_MAKER_SCALARS, lam=lam)
    kwargs['phi'] = float(rng.uniform(1e-4, 5e-4))
    kwargs['beta'] = float(rng.uniform(1e-4, 5e-4))
    return MarketConfig(makers=makers, **kwargs)


def matrices_of(config):
    """Return (mats, eff) of config"""
    eff = derive_effective_params(config)
    return build_state_matrices(config, eff), eff


def scalar_riccati_exact(config, t):
    """
    R(t) and phi(t) of the market without makers at lam == 0,
    where dR/dt = -R^2/eta and dphi/dt = -m^2 R backward from
    R(T) = gamma/2 - beta, phi(T) = 0.

    """
    g = 0.5 * config.gamma - config.beta
    eta = config.eta
    tau = config.horizon - np.asarray(t, dtype=float)
    R = g * eta / (eta - g * tau)
    phi = -config.m ** 2 * eta * np.log1p(-g * tau / eta)
    return R, phi
