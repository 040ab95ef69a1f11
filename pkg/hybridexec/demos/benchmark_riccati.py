"""
Informal Comparative Performance Tests for the Riccati solvers

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

import datetime
import timeit

import numpy as np

from hybridexec.model import build_state_matrices, derive_effective_params, \
    generate_makers, MarketConfig
from hybridexec.riccati import integrate_riccati_direct, make_grid, \
    solve_riccati_linearized

DEFAULT_MAKERS = (1, 5, 10, 20, 40)
DEFAULT_INTERVALS = (500, 2000)

# Functions
#
def bench_market(n, lam=0.001):
    """A one-day market with n makers spread like the ten-maker case"""
    return MarketConfig(
        makers=generate_makers(n), gamma=2.5e-7, eta=2.5e-6, phi=2.5e-4,
        beta=2.5e-4, mu=0.0, sigma_s=0.5, s0=50.0, x0=2e5, m=2e4,
        horizon=1.0, lam=lam,
    )


def run_bench_test(n, intervals, repeat=3):
    """
    Time both solvers on one configuration.

    Returns (time_linearized, time_direct, relative_gap) with the
    best of `repeat` runs, in seconds.

    """
    config = bench_market(n)
    eff = derive_effective_params(config)
    mats = build_state_matrices(config, eff)
    grid = make_grid(config.horizon, intervals)
    t_lin = min(timeit.repeat(
        lambda: solve_riccati_linearized(mats, eff, grid),
        number=1, repeat=repeat,
    ))
    t_dir = min(timeit.repeat(
        lambda: integrate_riccati_direct(mats, eff, grid),
        number=1, repeat=repeat,
    ))
    lin = solve_riccati_linearized(mats, eff, grid)
    direct = integrate_riccati_direct(mats, eff, grid)
    gap = max(
        np.max(np.abs(a - b)) / np.max(np.abs(b))
        for a, b in zip(lin.R, direct.R)
    )
    return t_lin, t_dir, gap


def run_all_tsv(**kwargs):
    """
    Run the benchmark over numbers of makers and grid sizes, and print
    a tab-separated report meant to be piped into a file.

    Optional Arguments
    ------------------
    * makers - numbers of market makers to try.
    * intervals - grid sizes to try.
    * comment - a single line shown in the report heading.

    """
    makers = kwargs.get('makers', DEFAULT_MAKERS)
    intervals = kwargs.get('intervals', DEFAULT_INTERVALS)
    comment = kwargs.get('comment')

    print("hybridexec Riccati Solver Benchmarks")
    print("Benchmark Started: {0}".format(datetime.datetime.now()))
    print("All times shown are in seconds")
    if comment is not None:
        print("Comments: {0}".format(comment))
    print("Makers\tIntervals\tTimeLin\tTimeDirect\tGap")
    for n in makers:
        for k in intervals:
            t_lin, t_dir, gap = run_bench_test(n, k)
            print("{0}\t{1}\t{2:.3f}\t{3:.3f}\t{4:.2e}".format(
                n, k, t_lin, t_dir, gap
            ))
    print("Benchmark Finished: {0}".format(datetime.datetime.now()))


if __name__ == '__main__':
    run_all_tsv()
