"""
Unit Tests for the inventory jump process and its diffusion limit

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

import json
import math
import unittest

import numpy as np
from scipy import stats

from hybridexec.errors import ConfigError, EventCapError, NumericalWarning, \
    PreconditionError, ResourceError
from hybridexec.hydro import QuoteModelParams, convergence_check, \
    default_event_cap, estimate_hydro_chunk_bytes, fill_intensities, \
    first_event_times, limit_params, \
    quote_spreads, simulate_inventories, simulate_inventory_jump
from hybridexec.pathseq import path_generator
from hybridexec.tests.examples import HYDRO_PARAMS

class QuoteModelParamsTests(unittest.TestCase):
    def test_from_dict(self):
        doc = {'A': 1, 'kappa': 2, 'nu_risk': 0.5, 'mu': 0, 'sigma': 0.3}
        p = QuoteModelParams.from_dict(doc)
        self.assertEqual(p.kappa, 2.0)
        self.assertIsInstance(p.A, float)

    def test_invalid(self):
        docs = (
            {'A': 1, 'kappa': 2, 'nu_risk': 0.5, 'mu': 0},
            {'A': 1, 'kappa': 2, 'nu_risk': 0.5, 'mu': 0, 'sigma': 0.3,
                'rho': 1},
            {'A': 0, 'kappa': 2, 'nu_risk': 0.5, 'mu': 0, 'sigma': 0.3},
            {'A': 1, 'kappa': 2, 'nu_risk': True, 'mu': 0, 'sigma': 0.3},
            [1, 2, 0.5, 0, 0.3],
        )
        for doc in docs:
            with self.subTest(doc=doc):
                with self.assertRaises(ConfigError):
                    QuoteModelParams.from_dict(doc)


class LimitParamsTests(unittest.TestCase):
    """Verify the Ornstein-Uhlenbeck limit"""

    def test_reference_case(self):
        lim = limit_params(HYDRO_PARAMS)
        self.assertAlmostEqual(lim.c1, 0.25, delta=1e-15)
        self.assertAlmostEqual(lim.c2, 1.0, delta=1e-15)
        self.assertAlmostEqual(lim.theta, 1.0, delta=1e-15)
        self.assertAlmostEqual(lim.qbar0, 1.0, delta=1e-15)
        self.assertAlmostEqual(lim.sigma_q, 1.0, delta=1e-15)
        self.assertAlmostEqual(lim.theta_printed, 0.5, delta=1e-15)

    def test_general_case(self):
        p = QuoteModelParams(A=140.0, kappa=1.5, nu_risk=0.01, mu=0.02,
            sigma=0.3)
        lim = limit_params(p)
        log_ratio = math.log(1 + 0.01 / 1.5)
        c1 = 70.0 * math.exp(-1.5 / 0.01 * log_ratio)
        c2 = math.sqrt(0.09 * 0.01 / (2 * 1.5 * 140.0)
            * math.exp((1 + 1.5 / 0.01) * log_ratio))
        self.assertAlmostEqual(lim.c1 / c1, 1.0, delta=1e-12)
        self.assertAlmostEqual(lim.c2 / c2, 1.0, delta=1e-12)
        self.assertAlmostEqual(lim.theta / (4 * c1 * c2 * 1.5), 1.0,
            delta=1e-12)
        self.assertAlmostEqual(lim.qbar0 / (0.02 / (0.01 * 0.09)), 1.0,
            delta=1e-12)

    def test_moments(self):
        lim = limit_params(HYDRO_PARAMS)
        self.assertAlmostEqual(lim.mean(0.0, q0=3.0), 3.0)
        self.assertAlmostEqual(lim.mean(1.0), 1.0 - math.exp(-1.0))
        self.assertAlmostEqual(lim.variance(1.0), 0.5 * (1 - math.exp(-2.0)))
        self.assertEqual(lim.variance(0.0), 0.0)


class QuoteTests(unittest.TestCase):
    """Verify the quoted spreads and fill intensities"""

    def test_spreads_at_target(self):
        h = 0.25
        db, da = quote_spreads(1.0, HYDRO_PARAMS, h)
        self.assertAlmostEqual(db, math.log(2.0) + 0.5 * h)
        self.assertAlmostEqual(da, db)

    def test_skew(self):
        h = 0.1
        q = np.array([-2.0, 0.0, 3.5])
        db, da = quote_spreads(q, HYDRO_PARAMS, h)
        self.assertTrue(np.allclose(db - da, 2 * (q - 1.0) * h))

    def test_intensities(self):
        h = 0.5
        lb, la = fill_intensities(1.0, HYDRO_PARAMS, h)
        db, _ = quote_spreads(1.0, HYDRO_PARAMS, h)
        self.assertAlmostEqual(float(lb), 4.0 * math.exp(-db))
        self.assertAlmostEqual(float(lb), float(la))

    def test_bad_scale(self):
        with self.assertRaises(PreconditionError):
            quote_spreads(0.0, HYDRO_PARAMS, 0.0)

    def test_first_event_exponential(self):
        times, total = first_event_times(HYDRO_PARAMS, 0.0, 0.25, 4000, 3)
        self.assertEqual(times.shape, (4000,))
        ks = stats.kstest(times, 'expon', args=(0.0, 1.0 / total))
        self.assertGreater(ks.pvalue, 1e-3)


class JumpPathTests(unittest.TestCase):
    """Verify the exact event-by-event simulation"""

    def test_lattice(self):
        rng = path_generator(1, 0)
        path = simulate_inventory_jump(HYDRO_PARAMS, 0.25, 1.0, rng, q0=0.5)
        steps = np.diff(path.values)
        self.assertTrue(np.allclose(np.abs(steps), 0.25))
        self.assertTrue(np.all(np.diff(path.times) > 0))
        self.assertLess(path.times[-1], 1.0)
        self.assertEqual(path.value_at(0.0), 0.5)

    def test_event_cap(self):
        rng = path_generator(1, 0)
        with self.assertRaises(EventCapError):
            simulate_inventory_jump(HYDRO_PARAMS, 0.25, 1.0, rng, cap=0)
        self.assertGreater(default_event_cap(HYDRO_PARAMS, 0.25, 1.0), 160)

    def test_negative_spread(self):
        rng = path_generator(2, 0)
        with self.assertWarns(NumericalWarning):
            simulate_inventory_jump(HYDRO_PARAMS, 0.5, 0.1, rng, q0=-20.0)


class InventoryBatchTests(unittest.TestCase):
    """Verify the vectorized simulation of many paths"""

    def test_independent_of_chunking(self):
        a, ca = simulate_inventories(HYDRO_PARAMS, 0.5, 1.0, 30, 4)
        b, cb = simulate_inventories(HYDRO_PARAMS, 0.5, 1.0, 30, 4,
            chunk_size=7)
        self.assertTrue(np.array_equal(a, b))
        self.assertTrue(np.array_equal(ca, cb))
        self.assertEqual(a.shape, (30, 2))
        self.assertFalse(np.any(np.isnan(a)))

    def test_fine_scale_in_a_bounded_budget(self):
        """
        At A=140 and h=0.125 the event cap is near 9e4 per path; the
        working set still stays in a fixed budget.

        """
        p = QuoteModelParams(A=140.0, kappa=0.3, nu_risk=0.01, mu=0.0,
            sigma=0.3)
        self.assertGreater(default_event_cap(p, 0.125, 1.0), 80000)
        self.assertLess(estimate_hydro_chunk_bytes(5000), 64 * 2 ** 20)
        values, counts = simulate_inventories(p, 0.125, 1.0, 20, 7,
            max_memory_mb=64)
        self.assertEqual(values.shape, (20, 2))
        self.assertFalse(np.any(np.isnan(values)))
        self.assertGreater(np.mean(counts), 1000)

    def test_memory_budget(self):
        with self.assertRaises(ResourceError):
            simulate_inventories(HYDRO_PARAMS, 0.5, 1.0, 10, 0,
                max_memory_mb=1e-3)
        with self.assertRaises(PreconditionError):
            simulate_inventories(HYDRO_PARAMS, 0.5, 1.0, 10, 0, chunk_size=0)

    def test_finer_scale_has_more_events(self):
        coarse = simulate_inventories(HYDRO_PARAMS, 0.5, 1.0, 200, 4)[1]
        fine = simulate_inventories(HYDRO_PARAMS, 0.25, 1.0, 200, 4)[1]
        self.assertGreater(np.mean(fine), 2.5 * np.mean(coarse))


class ConvergenceCheckTests(unittest.TestCase):
    """Verify the structure of convergence_check() reports"""

    def test_report(self):
        report = convergence_check(HYDRO_PARAMS, (0.5, 0.25), 1.0, 200, 9)
        self.assertEqual(len(report.estimates), 4)
        self.assertEqual([e.h for e in report.estimates],
            [0.5, 0.5, 0.25, 0.25])
        first = report.estimates[0]
        self.assertEqual(first.t, 0.5)
        self.assertAlmostEqual(first.target_mean, 1.0 - math.exp(-0.5))
        self.assertAlmostEqual(first.mean_error,
            abs(first.mean - first.target_mean))
        doc = json.loads(json.dumps(report.to_dict()))
        self.assertEqual(doc['h_list'], [0.5, 0.25])
        self.assertIsInstance(doc['converged'], bool)

    def test_bad_arguments(self):
        for h_list in ((), (0.25, 0.5), (0.5, 0.5)):
            with self.subTest(h_list=h_list):
                with self.assertRaises(PreconditionError):
                    convergence_check(HYDRO_PARAMS, h_list, 1.0, 10, 0)
        with self.assertRaises(PreconditionError):
            convergence_check(HYDRO_PARAMS, (0.5,), 1.0, 1, 0)


if __name__ == '__main__':
    unittest.main()
