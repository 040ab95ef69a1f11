"""
Unit Tests for the expected price impact of a meta-order

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
import os
import tempfile
import unittest

import numpy as np

from hybridexec.errors import ConfigError, FitError, PreconditionError
from hybridexec.impact import ImpactScheduleSpec, RateSchedule, \
    ensemble_superposition, expected_state, fit_exponential_decay, \
    impact_curve, impact_curve_asymptote, make_schedule_grid, write_impact_csv
from hybridexec.tests import examples

class RateScheduleTests(unittest.TestCase):
    def test_meta_order(self):
        s = RateSchedule.meta_order(100.0, 1.0, 3.0)
        self.assertEqual(s.breakpoints, (0.0, 1.0, 3.0))
        self.assertEqual(s.rate_at(0.5), 100.0)
        self.assertEqual(s.rate_at(1.0), 0.0, 'pieces are right-open')
        self.assertEqual(s.executed(), 100.0)
        self.assertEqual(s.executed(0.25), 25.0)

    def test_overlap(self):
        s = RateSchedule(pieces=((0, 2, 1.0), (1, 3, 2.0)), horizon=3)
        self.assertTrue(np.array_equal(s.rate_at([0.5, 1.5, 2.5]),
            [1.0, 3.0, 2.0]))
        self.assertEqual(s.end_of_trading, 3.0)

    def test_invalid_piece(self):
        for piece in ((0.0, 4.0, 1.0), (-1.0, 1.0, 1.0), (2.0, 1.0, 1.0)):
            with self.subTest(piece=piece):
                with self.assertRaises(ConfigError):
                    RateSchedule(pieces=(piece,), horizon=3.0)

    def test_spec(self):
        spec = ImpactScheduleSpec.from_dict(
            {'rate': 10, 't_exec': 1, 'horizon': 2})
        self.assertEqual(spec.to_schedule().executed(), 10.0)
        with self.assertRaises(ConfigError):
            ImpactScheduleSpec.from_dict({'rate': 10, 'start': 0})
        with self.assertRaises(ConfigError):
            ImpactScheduleSpec.from_dict({'rate': 10})

    def test_grid_has_breakpoints(self):
        s = RateSchedule(pieces=((0.3, 0.7, 1.0),), horizon=2.0)
        grid = make_schedule_grid(s, 100)
        for b in s.breakpoints:
            self.assertIn(b, grid)
        self.assertTrue(np.all(np.diff(grid) > 0))


class FitTests(unittest.TestCase):
    """Verify fit_exponential_decay()"""

    def test_exact_exponential(self):
        t = np.linspace(0.0, 4.0, 401)
        curve = -2.0 + 0.3 * np.exp(-1.7 * t)
        fit = fit_exponential_decay(t, curve, 1.0, -2.0)
        self.assertAlmostEqual(fit.rate, 1.7, delta=1e-9)
        self.assertGreater(fit.r_squared, 1 - 1e-10)
        rate, r2 = fit
        self.assertEqual(rate, fit.rate)

    def test_not_fittable(self):
        t = np.linspace(0.0, 1.0, 50)
        cases = {
            'sign change': np.cos(4 * t),
            'growing': np.exp(t),
            'too short': np.exp(-t),
        }
        for label, curve in cases.items():
            with self.subTest(case=label):
                start = 0.99 if label == 'too short' else 0.0
                with self.assertRaises(FitError):
                    fit_exponential_decay(t, curve, start, 0.0)


class ImpactCurveTests(unittest.TestCase):
    """Impact of a meta-order on single makers and on an ensemble"""

    def setUp(self):
        self.schedule = RateSchedule.meta_order(2e5, 1.0, 4.0)
        self.grid = make_schedule_grid(self.schedule)

    def test_single_maker_relaxes_exponentially(self):
        base = examples.single_maker_market(theta=3.0)
        no_feedback = base.replace(
            makers=(dataclasses.replace(base.makers[0], qbar1=0.0),)
        )
        for label, config in (('feedback', base), ('none', no_feedback)):
            with self.subTest(qbar1=label):
                curve = impact_curve(self.schedule, config, self.grid)
                self.assertEqual(curve[0], 0.0)
                asym = impact_curve_asymptote(self.schedule, config)
                fit = fit_exponential_decay(self.grid, curve, 1.0, asym)
                self.assertAlmostEqual(fit.rate, 3.0, delta=1e-3)
                self.assertGreaterEqual(fit.r_squared, 0.999)

    def test_ensemble_is_not_single_exponential(self):
        config = examples.ten_maker_market()
        curve = impact_curve(self.schedule, config, self.grid)
        asym = impact_curve_asymptote(self.schedule, config)
        fit = fit_exponential_decay(self.grid, curve, 1.0, asym)
        self.assertLess(fit.r_squared, 0.999)
        self.assertGreater(fit.rate, 1.0, 'faster than the slowest maker')

    def test_superposition(self):
        config = examples.ten_maker_market(n=5, gamma=0.0)
        ensemble, components = ensemble_superposition(self.schedule, config,
            self.grid)
        self.assertEqual(components.shape, (5, len(self.grid)))
        total = config.weights @ components
        self.assertTrue(np.allclose(ensemble, total, rtol=1e-10,
            atol=1e-12 * np.max(np.abs(ensemble))))

    def test_fourth_order_convergence(self):
        config = examples.single_maker_market(theta=3.0)
        mats, eff = examples.matrices_of(config)
        ref = expected_state(self.schedule, mats,
            make_schedule_grid(self.schedule, 640), config.initial_state)
        errors = []
        for intervals in (40, 80):
            grid = make_schedule_grid(self.schedule, intervals)
            xs = expected_state(self.schedule, mats, grid,
                config.initial_state)
            stride = 640 // intervals
            errors.append(np.max(np.abs(xs - ref[::stride])))
        ratio = errors[0] / errors[1]
        self.assertGreater(ratio, 10.0)
        self.assertLess(ratio, 22.0)

    def test_permanent_part(self):
        """Without makers the impact is permanent and linear in X"""
        config = examples.scalar_market()
        curve = impact_curve(self.schedule, config, self.grid)
        self.assertAlmostEqual(curve[-1], -config.gamma * 2e5, delta=1e-12)
        self.assertAlmostEqual(
            impact_curve_asymptote(self.schedule, config), curve[-1],
            delta=1e-12)

    def test_needs_zero_drift(self):
        config = examples.single_maker_market(mu=0.1)
        with self.assertRaises(PreconditionError):
            impact_curve(self.schedule, config, self.grid)

    def test_csv(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'impact.csv')
            write_impact_csv([0.0, 0.5], [0.0, -0.25], path)
            with open(path, newline='') as f:
                rows = list(csv.reader(f))
        self.assertEqual(rows, [['t', 'impact'], ['0.0', '0.0'],
            ['0.5', '-0.25']])


if __name__ == '__main__':
    unittest.main()
