"""
Ten-Maker Walkthrough: solve, compare and inspect the impact curve

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

# Objectives
# ----------
# Walk through the library on the bundled ten-maker configuration
# without the command line: solve for the value function, compare the
# optimal feedback with the TWAP benchmarks on common random numbers,
# then show how the price relaxes once the meta-order is done.
#
# Run with:  python -m hybridexec.demos.demo_table1 [n_paths]
#

import os
import sys

from hybridexec.cli import CONFIG_DIR
from hybridexec.impact import ImpactScheduleSpec, fit_exponential_decay, \
    impact_curve, impact_curve_asymptote, make_schedule_grid
from hybridexec.model import load_market_config, read_json
from hybridexec.report import summarize
from hybridexec.riccati import solve_model, value_function
from hybridexec.simulator import dominance_table, monte_carlo
from hybridexec.strategies import build_strategy

TABLE1_PATH = os.path.join(CONFIG_DIR, 'table1.json')

# Functions
#
def show_value(config):
    mats, eff, sol = solve_model(config)
    w0 = value_function(0.0, config.initial_state, sol)
    print('Value function at the start: w(0, x0) = {0:.6g}'.format(w0))
    print('  eta_tilde={0:.4g}  psi={1:.4g}'.format(eff.eta_tilde, eff.psi))
    return mats, eff, sol


def show_comparison(config, mats, eff, sol, n_paths):
    strategies = {
        name: build_strategy(name, config, mats, eff, sol)
        for name in ('optimal', 'twap', 'adapted_twap')
    }
    result = monte_carlo(strategies, config, n_paths, 1e-3, seed=2026,
        mats=mats, eff=eff)
    print('\nPenalized P&L over {0} paths'.format(n_paths))
    for name in result.strategies:
        s = summarize(result.column(name, 'objective_econ'))
        print('  {0:<14} mean {1:>12.6g}  std {2:>10.4g}'.format(
            name, s.mean, s.std
        ))
    print('\nPaired LQ-objective differences, optimal minus other')
    for d in dominance_table(result, 'optimal'):
        print('  {0:<14} {1:>10.4g} +/- {2:<8.3g} z={3:.2f}'.format(
            d.b, d.mean, d.se, d.z
        ))


def show_impact(config):
    spec = ImpactScheduleSpec.from_dict(read_json(TABLE1_PATH)['schedule'])
    schedule = spec.to_schedule()
    grid = make_schedule_grid(schedule, spec.intervals)
    curve = impact_curve(schedule, config, grid)
    asym = impact_curve_asymptote(schedule, config)
    fit = fit_exponential_decay(grid, curve, spec.t_exec, asym)
    print('\nImpact relaxation after the order: rate {0:.4g}, R^2 {1:.5f}'
        .format(fit.rate, fit.r_squared))
    print('  (one exponential would give R^2 close to 1)')


def main(argv):
    n_paths = int(argv[1]) if len(argv) > 1 else 2000
    config = load_market_config(TABLE1_PATH)
    mats, eff, sol = show_value(config)
    show_comparison(config, mats, eff, sol, n_paths)
    show_impact(config)


if __name__ == '__main__':
    main(sys.argv)
