"""
Unit Tests for the execution strategies

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
import unittest

import numpy as np

from hybridexec.errors import NumericalWarning, PreconditionError
from hybridexec.model import MarketMakerSpec
from hybridexec.riccati import solve_model
from hybridexec.simulator import expected_path
from hybridexec.strategies import STRATEGY_NAMES, TWAP, AdaptedTWAP, \
    ac_kappa, ac_position, ac_rate, adapted_alpha, build_strategy, \
    closed_form_coefficients, closed_form_rate_risk_averse, \
    closed_form_rate_risk_neutral, feedback_rate, lambda_matrices
from hybridexec.tests import examples

# Test Data Helper Functions
#
def random_states(rng, config, count):
    """States with maker inventories in the thousands of shares"""
    Q = rng.uniform(-5e3, 5e3, size=(count, config.n))
    X = rng.uniform(0.0, config.x0, size=count)
    return np.column_stack([Q, X])


def assert_rates_close(case, v, ref, rtol):
    scale = max(np.max(np.abs(ref)), 1.0)
    gap = np.max(np.abs(v - ref)) / scale
    case.assertLessEqual(gap, rtol, 'relative gap {0:.3e}'.format(gap))


# Classes
#
class ClosedFormRiskAverseTests(unittest.TestCase):
    """Closed-form rate with risk aversion and no rate feedback"""

    @classmethod
    def setUpClass(cls):
        cls.config = examples.ten_maker_market(lam=0.001, feedback=False)
        cls.mats, cls.eff, cls.sol = solve_model(cls.config)
        cls.coeffs = closed_form_coefficients(cls.config, cls.eff)

    def test_matches_feedback(self):
        rng = np.random.default_rng(37)
        states = random_states(rng, self.config, 20)
        for u in self.sol.grid[:2000:100]:
            with self.subTest(u=u):
                ref = feedback_rate(u, states, self.sol, self.mats, self.eff)
                v = closed_form_rate_risk_averse(
                    u, states[:, :-1], states[:, -1], self.coeffs, self.eff,
                    self.config.mu, self.config.phi,
                )
                assert_rates_close(self, v, ref, 1e-6)

    def test_terminal_lambdas(self):
        lam_u, lam_0 = lambda_matrices(1.0, 1.0, self.coeffs)
        self.assertTrue(np.allclose(lam_u, np.eye(self.config.n), atol=1e-12))
        self.assertTrue(np.allclose(lam_0, 0.0, atol=1e-12))

    def test_lambdas_are_diagonal(self):
        lam_u, lam_0 = lambda_matrices(0.3, 1.0, self.coeffs)
        off = ~np.eye(self.config.n, dtype=bool)
        self.assertTrue(np.all(lam_u[off] == 0))
        self.assertTrue(np.all(lam_0[off] == 0))
        with self.assertRaises(PreconditionError):
            lambda_matrices(1.5, 1.0, self.coeffs)

    def test_without_inventory_penalty(self):
        """phi == 0 and mu == 0 leave zeta coth(s) X"""
        config = self.config.replace(phi=0.0)
        eff = examples.matrices_of(config)[1]
        coeffs = closed_form_coefficients(config, eff)
        Q = np.full(config.n, 1234.0)
        for u in (0.0, 0.5, 0.99):
            with self.subTest(u=u):
                s = coeffs.zeta * (1.0 - u + coeffs.alpha_tilde)
                v = closed_form_rate_risk_averse(u, Q, 1e5, coeffs, eff, 0.0, 0.0)
                expected = coeffs.zeta / math.tanh(s) * 1e5
                self.assertAlmostEqual(v / expected, 1.0, delta=1e-12)

    def test_tends_to_risk_neutral(self):
        config = self.config.replace(lam=1e-10)
        eff = examples.matrices_of(config)[1]
        coeffs = closed_form_coefficients(config, eff)
        neutral = self.config.replace(lam=0.0)
        rng = np.random.default_rng(39)
        states = random_states(rng, config, 10)
        for u in (0.0, 0.25, 0.5, 0.9):
            with self.subTest(u=u):
                v = closed_form_rate_risk_averse(
                    u, states[:, :-1], states[:, -1], coeffs, eff, 0.0,
                    config.phi,
                )
                ref = closed_form_rate_risk_neutral(
                    u, states[:, :-1], states[:, -1], neutral
                )
                assert_rates_close(self, v, ref, 1e-4)

    def test_resonance_shift(self):
        base = self.config.replace(makers=(
            MarketMakerSpec(theta=2.0, sigma_q=0.0, weight=0.5),
            MarketMakerSpec(theta=3.0, sigma_q=0.0, weight=0.5),
        ))
        zeta = examples.matrices_of(base)[1].zeta
        config = base.replace(makers=(
            MarketMakerSpec(theta=zeta, sigma_q=0.0, weight=0.5),
            MarketMakerSpec(theta=3.0, sigma_q=0.0, weight=0.5),
        ))
        with self.assertWarns(NumericalWarning):
            coeffs = closed_form_coefficients(config)
        self.assertGreater(coeffs.thetas[0], zeta)
        self.assertTrue(np.all(np.isfinite(coeffs.resolvent)))

    def test_preconditions(self):
        with self.assertRaises(PreconditionError, msg='lam == 0'):
            closed_form_coefficients(self.config.replace(lam=0.0))
        with self.assertRaises(PreconditionError, msg='rate feedback'):
            closed_form_coefficients(examples.ten_maker_market(lam=0.001))
        with self.assertRaises(PreconditionError, msg='small beta'):
            closed_form_coefficients(self.config.replace(beta=1e-7))


class ClosedFormRiskNeutralTests(unittest.TestCase):
    """Closed-form rate without risk aversion or rate feedback"""

    @classmethod
    def setUpClass(cls):
        cls.config = examples.ten_maker_market(lam=0.0, feedback=False)
        cls.mats, cls.eff, cls.sol = solve_model(cls.config)

    def test_matches_feedback(self):
        rng = np.random.default_rng(9)
        states = random_states(rng, self.config, 20)
        for u in self.sol.grid[:2000:100]:
            with self.subTest(u=u):
                ref = feedback_rate(u, states, self.sol, self.mats, self.eff)
                v = closed_form_rate_risk_neutral(
                    u, states[:, :-1], states[:, -1], self.config
                )
                assert_rates_close(self, v, ref, 1e-6)

    def test_without_inventory_penalty(self):
        config = self.config.replace(phi=0.0)
        alpha = adapted_alpha(config)
        Q = np.full(config.n, -77.0)
        for u in (0.0, 0.5, 1.0):
            with self.subTest(u=u):
                v = closed_form_rate_risk_neutral(u, Q, 1e5, config)
                self.assertAlmostEqual(v, 1e5 / (1.0 - u + alpha), delta=1e-6)

    def test_preconditions(self):
        with self.assertRaises(PreconditionError):
            closed_form_rate_risk_neutral(0.0, np.zeros(10), 1.0,
                self.config.replace(lam=0.001))
        with self.assertRaises(PreconditionError):
            closed_form_rate_risk_neutral(0.0, np.zeros(10), 1.0,
                examples.ten_maker_market())


class SimpleScheduleTests(unittest.TestCase):
    """TWAP, adapted TWAP and the Almgren-Chriss schedule"""

    def setUp(self):
        self.config = examples.ten_maker_market(lam=0.001)

    def test_twap(self):
        strat = TWAP(self.config)
        states = np.zeros((4, self.config.n + 1))
        self.assertTrue(np.all(strat(0.3, states) == 2e5))
        self.assertTrue(strat.open_loop)

    def test_adapted_twap(self):
        alpha = adapted_alpha(self.config)
        self.assertAlmostEqual(alpha, 5e-6 / (5e-4 - 2.5e-7), delta=1e-15)
        strat = AdaptedTWAP(alpha, 1.0)
        state = np.zeros(self.config.n + 1)
        state[-1] = 1e4
        self.assertAlmostEqual(strat(0.5, state), 1e4 / (0.5 + alpha))
        with self.assertRaises(PreconditionError):
            AdaptedTWAP(0.0, 1.0)

    def test_ac_kappa(self):
        self.assertAlmostEqual(ac_kappa(self.config), 10.0, delta=1e-12)
        with self.assertRaises(PreconditionError):
            ac_kappa(self.config.replace(lam=0.0))

    def test_ac_schedule(self):
        self.assertAlmostEqual(ac_position(0.0, self.config), 2e5, delta=1e-8)
        self.assertEqual(ac_position(1.0, self.config), 0.0)
        t = np.linspace(0.1, 0.9, 9)
        h = 1e-6
        slope = (ac_position(t + h, self.config)
            - ac_position(t - h, self.config)) / (2 * h)
        self.assertTrue(np.allclose(-slope, ac_rate(t, self.config),
            rtol=1e-6))

    def test_ac_limit_of_optimal(self):
        """
        Without makers' effect, volume noise and drift, and with a
        heavy block penalty, the optimal expected trajectory is the
        Almgren-Chriss schedule.

        """
        config = examples.ten_maker_market(lam=0.001, feedback=False, m=0.0,
            phi=0.0, beta=1e4 * 2.5e-6)
        mats, eff, sol = solve_model(config)
        strat = build_strategy('optimal', config, mats, eff, sol)
        path = expected_path(strat, mats, config, 1e-3)
        target = ac_position(path.times, config)
        gap = np.max(np.abs(path.position[0] - target)) / config.x0
        self.assertLess(gap, 0.01)


class BuildStrategyTests(unittest.TestCase):
    """Verify build_strategy()"""

    def test_every_name(self):
        configs = {
            'closed_form_risk_averse': examples.ten_maker_market(
                lam=0.001, feedback=False),
            'closed_form_risk_neutral': examples.ten_maker_market(
                feedback=False),
            'almgren_chriss': examples.ten_maker_market(lam=0.001),
        }
        for name in STRATEGY_NAMES:
            with self.subTest(name=name):
                config = configs.get(name, examples.ten_maker_market(n=3))
                strat = build_strategy(name, config)
                state = config.initial_state
                self.assertTrue(np.isfinite(strat(0.0, state)))
                rates = strat(0.5, np.tile(state, (5, 1)))
                self.assertEqual(np.shape(rates), (5,))

    def test_unknown_name(self):
        with self.assertRaises(ValueError):
            build_strategy('vwap', examples.ten_maker_market(n=2))

    def test_inadmissible(self):
        with self.assertRaises(PreconditionError):
            build_strategy('closed_form_risk_averse', examples.ten_maker_market())
        with self.assertRaises(PreconditionError):
            build_strategy('almgren_chriss', examples.ten_maker_market())


if __name__ == '__main__':
    unittest.main()
