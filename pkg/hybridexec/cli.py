"""
Command-line front end

  hybridexec [-v|-q] solve    CONFIG [--variant V] [--out DIR] ...
  hybridexec [-v|-q] compare  CONFIG [--seed S] [--paths N] [--dt DT] ...
  hybridexec [-v|-q] simulate CONFIG --strategy NAME [--keep-paths K] ...
  hybridexec [-v|-q] impact   CONFIG [--makers single|ensemble] ...
  hybridexec [-v|-q] hydro    CONFIG [--h H [H ...]] [--paths N] ...

CONFIG is a JSON file, or the name of a bundled configuration
("table1", "hydro"). Settings are taken from built-in defaults, then
the file, then the HYBRIDEXEC_OUTPUT_DIR environment variable (output
directory only), then the command-line flags.

Exit codes: 0 success, 2 invalid configuration or usage, 3 numerical
failure, 4 input/output failure.

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

import argparse
import csv
import dataclasses
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from hybridexec import __version__
from hybridexec.errors import ConfigError, FitError, NumericalError, \
    OutputError, PreconditionError, ResourceError, SampleError, \
    ValidationError
from hybridexec.hydro import QuoteModelParams, convergence_check
from hybridexec.impact import ImpactScheduleSpec, fit_exponential_decay, \
    impact_curve, impact_curve_asymptote, make_schedule_grid, \
    plot_impact_curve, write_impact_csv
from hybridexec.model import build_state_matrices, derive_effective_params, \
    market_from_dict, merge_dicts, read_json, validate_config
from hybridexec.report import histogram, kde, kde_grid, plot_distribution, \
    plot_trajectories, summarize, write_histogram_csv, write_json, \
    write_kde_csv
from hybridexec.riccati import make_grid, solve_riccati, value_function, \
    write_solution_csv
from hybridexec.simulator import dominance_table, expected_path, \
    monte_carlo, write_outcomes_csv, write_paths_csv, write_trajectories_csv
from hybridexec.strategies import STRATEGY_NAMES, build_strategy

log = logging.getLogger(__name__)

ENV_OUTPUT_DIR = 'HYBRIDEXEC_OUTPUT_DIR'
DEFAULT_OUTPUT_DIR = 'hybridexec-out'
CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'configs')
REPORT_QUANTITIES = ('objective_econ', 'objective_lq', 'terminal_position')

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

# Classes
#
@dataclass(frozen=True)
class RunOptions:
    """
    The "run" section of a configuration document.

    dt None means T/1000; grid_points counts the Riccati grid's
    points, so the default 2001 gives 2000 intervals.

    """
    n_paths: int = 10000
    dt: Optional[float] = None
    seed: int = 0
    grid_points: int = 2001
    output_dir: Optional[str] = None
    workers: int = 1
    chunk_size: int = 500
    solver: str = 'linearized'
    max_memory_mb: Optional[float] = None

    def time_step(self, horizon):
        return horizon / 1000 if self.dt is None else self.dt


@dataclass(frozen=True)
class StrategyChoice:
    """One entry of the "strategies" list"""
    name: str
    label: Optional[str] = None

    @property
    def key(self):
        return self.label or self.name


@dataclass(frozen=True)
class HydroOptions:
    """The "hydro" section: simulation horizon and scales"""
    horizon: float = 1.0
    h_list: Tuple[float, ...] = (0.5, 0.25, 0.125)


@dataclass(frozen=True)
class RunConfig:
    """A complete, validated configuration document"""
    market: Optional[object]
    run: RunOptions
    strategies: Tuple[StrategyChoice, ...] = ()
    schedule: Optional[ImpactScheduleSpec] = None
    quote_model: Optional[QuoteModelParams] = None
    hydro: HydroOptions = field(default_factory=HydroOptions)
    variant: Optional[str] = None

    def require_market(self):
        if self.market is None:
            raise ConfigError('configuration has no "market" section')
        return self.market


# Configuration
#
_TOP_KEYS = {
    'description', 'market', 'run', 'strategies', 'variants', 'schedule',
    'quote_model', 'hydro',
}


def _dataclass_from(cls, doc, where):
    allowed = {f.name for f in dataclasses.fields(cls)}
    if not isinstance(doc, dict):
        raise ConfigError('{0} must be a JSON object'.format(where))
    unknown = sorted(set(doc) - allowed)
    if unknown:
        msg = 'unknown key(s) in {0}: {1}'.format(where, ', '.join(unknown))
        raise ConfigError(msg)
    try:
        return cls(**doc)
    except TypeError as e:
        raise ConfigError('{0}: {1}'.format(where, e)) from e


def _strategies_from(doc):
    if not isinstance(doc, list):
        raise ConfigError('strategies must be a JSON list')
    out = []
    for i, item in enumerate(doc):
        if isinstance(item, str):
            item = {'name': item}
        choice = _dataclass_from(StrategyChoice, item, 'strategies[{0}]'.format(i))
        if choice.name not in STRATEGY_NAMES:
            msg = 'strategies[{0}]: unknown strategy {1!r}; choose from {2}'
            raise ConfigError(
                msg.format(i, choice.name, ', '.join(STRATEGY_NAMES))
            )
        out.append(choice)
    keys = [c.key for c in out]
    if len(set(keys)) != len(keys):
        raise ConfigError('strategy labels must be unique: {0}'.format(keys))
    return tuple(out)


def resolve_config_path(name):
    """
    Return name if it is an existing file, else the bundled
    configuration of that name.

    """
    if os.path.isfile(name):
        return name
    bundled = os.path.join(CONFIG_DIR, name + '.json')
    if os.path.isfile(bundled):
        return bundled
    return name


def load_run_config(path, variant=None, environ=None):
    """
    Load and check a configuration document.

    Exceptions
    ----------
    * OutputError - when the file cannot be read.
    * ConfigError - for malformed documents, unknown keys, unknown
      strategies or an unknown variant.

    """
    environ = os.environ if environ is None else environ
    doc = read_json(resolve_config_path(path))
    if not isinstance(doc, dict):
        raise ConfigError('configuration must be a JSON object')
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        msg = 'unknown top-level key(s): {0}'.format(', '.join(unknown))
        raise ConfigError(msg)
    market = None
    strategies = doc.get('strategies', [])
    if 'market' in doc:
        market_doc = doc['market']
        if variant is not None:
            variants = doc.get('variants', {})
            if variant not in variants:
                msg = 'variant {0!r} not found; available: {1}'.format(
                    variant, ', '.join(sorted(variants)) or 'none'
                )
                raise ConfigError(msg)
            override = dict(variants[variant])
            strategies = override.pop('strategies', strategies)
            market_doc = merge_dicts(market_doc, override)
        market = market_from_dict(market_doc)
    elif variant is not None:
        raise ConfigError('--variant given but the configuration has no market')
    run = _dataclass_from(RunOptions, doc.get('run', {}), 'run')
    if environ.get(ENV_OUTPUT_DIR):
        run = dataclasses.replace(run, output_dir=environ[ENV_OUTPUT_DIR])
    hydro = _dataclass_from(HydroOptions, doc.get('hydro', {}), 'hydro')
    hydro = dataclasses.replace(hydro, h_list=tuple(hydro.h_list))
    return RunConfig(
        market=market, run=run,
        strategies=_strategies_from(strategies),
        schedule=ImpactScheduleSpec.from_dict(doc['schedule'])
            if 'schedule' in doc else None,
        quote_model=QuoteModelParams.from_dict(doc['quote_model'])
            if 'quote_model' in doc else None,
        hydro=hydro, variant=variant,
    )


def apply_overrides(cfg, args):
    """Apply command-line flags on top of a RunConfig"""
    changes = {}
    for flag, key in (
        ('seed', 'seed'), ('paths', 'n_paths'), ('dt', 'dt'),
        ('out', 'output_dir'), ('workers', 'workers'),
        ('grid_points', 'grid_points'), ('solver', 'solver'),
    ):
        val = getattr(args, flag, None)
        if val is not None:
            changes[key] = val
    run = dataclasses.replace(cfg.run, **changes)
    if run.output_dir is None:
        run = dataclasses.replace(run, output_dir=DEFAULT_OUTPUT_DIR)
    return dataclasses.replace(cfg, run=run)


def _output_dir(cfg):
    path = cfg.run.output_dir
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise OutputError('cannot create output directory {0}: {1}'.format(
            path, e.strerror or e
        )) from e
    if not os.access(path, os.W_OK):
        raise OutputError('output directory {0} is not writable'.format(path))
    return path


def _validated_market(cfg):
    market = cfg.require_market()
    report = validate_config(market)
    report.raise_for_failures()
    for check in report.failed():
        log.info('informational check failed: %s: %s', check.name, check.message)
    return market, report


def _solve(market, run):
    eff = derive_effective_params(market)
    mats = build_state_matrices(market, eff)
    if run.grid_points < 2:
        raise ConfigError('run.grid_points must be >= 2')
    grid = make_grid(market.horizon, run.grid_points - 1)
    sol = solve_riccati(mats, eff, grid, method=run.solver, mu=market.mu)
    return mats, eff, sol


def _build_strategies(cfg, market, mats, eff, sol):
    out = {}
    for choice in cfg.strategies:
        out[choice.key] = build_strategy(
            choice.name, market, mats=mats, eff=eff, sol=sol
        )
    return out


# Commands
#
def cmd_solve(cfg):
    """Solve the Riccati system; write riccati.csv and value.json"""
    market, report = _validated_market(cfg)
    out = _output_dir(cfg)
    mats, eff, sol = _solve(market, cfg.run)
    x0 = market.initial_state
    w0 = value_function(0.0, x0, sol)
    write_solution_csv(sol, os.path.join(out, 'riccati.csv'))
    write_json({
        'w0': w0,
        'initial_state': x0.tolist(),
        'method': sol.method,
        'grid_points': len(sol.grid),
        'effective': dataclasses.asdict(eff),
        'validation': report.to_dict(),
        'variant': cfg.variant,
    }, os.path.join(out, 'value.json'))
    print('w(0, x0) = {0:.10g}'.format(w0))
    return EXIT_OK


def _write_distributions(result, out, figures):
    summary = {}
    for name in result.strategies:
        per = {}
        for quantity in REPORT_QUANTITIES:
            x = result.column(name, quantity)
            per[quantity] = summarize(x).to_dict() if x.size >= 2 else None
            stem = '{0}_{1}'.format(name, quantity)
            edges, counts = histogram(x)
            write_histogram_csv(
                edges, counts, os.path.join(out, 'hist_{0}.csv'.format(stem))
            )
            if x.size >= 2 and np.ptp(x) > 0:
                grid = kde_grid(x)
                write_kde_csv(
                    grid, kde(x, grid),
                    os.path.join(out, 'kde_{0}.csv'.format(stem)),
                )
            if figures:
                plot_distribution(
                    x, os.path.join(out, 'hist_{0}.svg'.format(stem)),
                    title=name, xlabel=quantity,
                )
        per['mean_abs_terminal_position'] = float(
            np.mean(np.abs(result.column(name, 'terminal_position')))
        )
        summary[name] = per
    return summary


def _dominance_rows(table):
    rows = [['reference', 'other', 'field', 'n', 'mean', 'se', 'z',
        'p_value', 'significant']]
    for d in table:
        rows.append([
            d.a, d.b, d.field, d.n, repr(d.mean), repr(d.se), repr(d.z),
            repr(d.p_value), str(d.significant).lower(),
        ])
    return rows


def _write_csv_rows(path, rows):
    try:
        with open(path, 'w', newline='', encoding='utf-8') as f:
            csv.writer(f, lineterminator='\r\n').writerows(rows)
    except OSError as e:
        raise OutputError('cannot write {0}: {1}'.format(path, e)) from e


def cmd_compare(cfg, figures=True):
    """Run every configured strategy on common random numbers"""
    if not cfg.strategies:
        raise ConfigError('no strategies configured; nothing to compare')
    market, _ = _validated_market(cfg)
    out = _output_dir(cfg)
    run = cfg.run
    mats, eff, sol = _solve(market, run)
    strategies = _build_strategies(cfg, market, mats, eff, sol)
    dt = run.time_step(market.horizon)
    result = monte_carlo(
        strategies, market, run.n_paths, dt, run.seed, mats=mats, eff=eff,
        workers=run.workers, chunk_size=run.chunk_size,
        max_memory_mb=run.max_memory_mb,
    )
    write_outcomes_csv(result, os.path.join(out, 'outcomes.csv'))
    expected = {
        name: expected_path(s, mats, market, dt)
        for name, s in strategies.items()
    }
    write_trajectories_csv(result, expected, os.path.join(out, 'trajectories.csv'))
    summary = _write_distributions(result, out, figures)
    reference = next(
        (c.key for c in cfg.strategies if c.name == 'optimal'),
        result.strategies[0],
    )
    table = dominance_table(result, reference) if run.n_paths >= 2 else []
    _write_csv_rows(os.path.join(out, 'dominance.csv'), _dominance_rows(table))
    write_json({
        'seed': result.seed, 'n_paths': result.n_paths, 'dt': result.dt,
        'variant': cfg.variant,
        'w0': value_function(0.0, market.initial_state, sol),
        'strategies': summary,
        'dominance': [dataclasses.asdict(d) for d in table],
    }, os.path.join(out, 'summary.json'))
    if figures:
        plot_trajectories(
            result.times,
            {name: p.position[0] for name, p in expected.items()},
            os.path.join(out, 'trajectories.svg'),
        )
    print('{0:<28} {1:>14} {2:>12} {3:>9}  {4}'.format(
        '{0} minus'.format(reference), 'mean', 'se', 'z', 'significant'
    ))
    for d in table:
        print('{0:<28} {1:>14.6g} {2:>12.4g} {3:>9.3f}  {4}'.format(
            d.b, d.mean, d.se, d.z, 'yes' if d.significant else 'no'
        ))
    return EXIT_OK


def cmd_simulate(cfg, strategy, keep_paths=10):
    """Simulate a single strategy and keep its first paths"""
    if strategy not in STRATEGY_NAMES:
        raise ConfigError('unknown strategy {0!r}; choose from {1}'.format(
            strategy, ', '.join(STRATEGY_NAMES)
        ))
    market, _ = _validated_market(cfg)
    out = _output_dir(cfg)
    run = cfg.run
    mats = eff = sol = None
    if strategy == 'optimal':
        mats, eff, sol = _solve(market, run)
    spec = build_strategy(strategy, market, mats=mats, eff=eff, sol=sol)
    result = monte_carlo(
        {strategy: spec}, market, run.n_paths, run.time_step(market.horizon),
        run.seed, mats=mats, eff=eff, workers=run.workers,
        chunk_size=run.chunk_size, keep_paths=keep_paths,
        max_memory_mb=run.max_memory_mb,
    )
    write_outcomes_csv(result, os.path.join(out, 'outcomes.csv'))
    summary = {
        q: summarize(result.column(strategy, q)).to_dict()
        for q in REPORT_QUANTITIES if run.n_paths >= 2
    }
    write_json({
        'seed': result.seed, 'n_paths': result.n_paths, 'dt': result.dt,
        'strategy': strategy, 'summary': summary,
    }, os.path.join(out, 'summary.json'))
    if keep_paths > 0:
        write_paths_csv(result, os.path.join(out, 'paths.csv'))
    print('{0}: mean objective {1:.6g} over {2} paths'.format(
        strategy, float(np.mean(result.column(strategy, 'objective_econ'))),
        result.n_paths,
    ))
    return EXIT_OK


def cmd_impact(cfg, makers='ensemble', figures=True):
    """Expected impact curve of a meta-order and its exponential fit"""
    market = cfg.require_market()
    if makers == 'single':
        if not market.n:
            raise ConfigError('market has no market makers')
        first = dataclasses.replace(market.makers[0], weight=1.0)
        market = market.replace(makers=(first,))
    elif makers != 'ensemble':
        raise ConfigError('makers must be "single" or "ensemble"')
    out = _output_dir(cfg)
    spec = cfg.schedule or ImpactScheduleSpec(
        rate=market.x0 / market.horizon, t_exec=market.horizon,
        horizon=5 * market.horizon,
    )
    schedule = spec.to_schedule()
    grid = make_schedule_grid(schedule, spec.intervals)
    curve = impact_curve(schedule, market, grid)
    asymptote = impact_curve_asymptote(schedule, market)
    doc = {
        'makers': makers, 'thetas': market.thetas.tolist(),
        'rate': spec.rate, 't_exec': spec.t_exec, 'horizon': spec.horizon,
        'asymptote': asymptote,
    }
    try:
        fit = fit_exponential_decay(grid, curve, spec.t_exec, asymptote)
        doc.update(
            decay_rate=fit.rate, r_squared=fit.r_squared,
            single_exponential=fit.r_squared >= 0.999,
        )
    except FitError as e:
        doc.update(decay_rate=None, r_squared=None, fit_error=str(e))
    write_impact_csv(grid, curve, os.path.join(out, 'impact.csv'))
    write_json(doc, os.path.join(out, 'impact_fit.json'))
    if figures:
        plot_impact_curve(
            grid, curve, os.path.join(out, 'impact.svg'),
            t_exec=spec.t_exec, asymptote=asymptote,
        )
    print('impact fit: rate={0}, R^2={1}'.format(
        doc.get('decay_rate'), doc.get('r_squared')
    ))
    return EXIT_OK


def cmd_hydro(cfg, h_list=None):
    """Convergence of the jump inventory to its diffusion limit"""
    if cfg.quote_model is None:
        raise ConfigError('configuration has no "quote_model" section')
    out = _output_dir(cfg)
    h_list = tuple(h_list) if h_list else cfg.hydro.h_list
    report = convergence_check(
        cfg.quote_model, h_list, cfg.hydro.horizon, cfg.run.n_paths,
        cfg.run.seed, max_memory_mb=cfg.run.max_memory_mb,
    )
    write_json(report.to_dict(), os.path.join(out, 'hydro_report.json'))
    for e in report.estimates:
        print('h={0:<8g} t={1:<6g} mean err {2:.4g}  var err {3:.4g}'.format(
            e.h, e.t, e.mean_error, e.variance_error
        ))
    print('converged: {0}'.format('yes' if report.converged else 'no'))
    return EXIT_OK


# Entry Point
#
def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('config', help='JSON file or bundled config name')
    common.add_argument('--variant', help='market variant to apply')
    common.add_argument('--out', help='output directory')

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument('--seed', type=int, help='master random seed')
    sim.add_argument('--paths', type=int, help='number of Monte Carlo paths')
    sim.add_argument('--dt', type=float, help='simulation time step')
    sim.add_argument('--workers', type=int, help='worker threads')
    sim.add_argument('--grid-points', type=int, help='Riccati grid points')
    sim.add_argument('--solver', choices=('linearized', 'direct'))

    parser = argparse.ArgumentParser(
        prog='hybridexec',
        description='Optimal execution with hybrid price impact',
    )
    parser.add_argument('--version', action='version', version=__version__)
    parser.add_argument('-v', '--verbose', action='count', default=0)
    parser.add_argument('-q', '--quiet', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('solve', parents=[common], help='solve the Riccati system')
    p.add_argument('--grid-points', type=int, help='Riccati grid points')
    p.add_argument('--solver', choices=('linearized', 'direct'))

    p = sub.add_parser('compare', parents=[common, sim],
        help='compare strategies on common random numbers')
    p.add_argument('--no-figures', action='store_true')

    p = sub.add_parser('simulate', parents=[common, sim],
        help='simulate one strategy')
    p.add_argument('--strategy', required=True, choices=STRATEGY_NAMES)
    p.add_argument('--keep-paths', type=int, default=10)

    p = sub.add_parser('impact', parents=[common], help='expected impact curve')
    p.add_argument('--makers', choices=('single', 'ensemble'), default='ensemble')
    p.add_argument('--no-figures', action='store_true')

    p = sub.add_parser('hydro', parents=[common],
        help='jump inventory against its diffusion limit')
    p.add_argument('--h', type=float, nargs='+', dest='h_list')
    p.add_argument('--paths', type=int)
    p.add_argument('--seed', type=int)
    return parser


def _configure_logging(args):
    if args.quiet:
        level = logging.ERROR
    else:
        level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(
        level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )


def run_command(args):
    cfg = load_run_config(args.config, variant=args.variant)
    cfg = apply_overrides(cfg, args)
    log.info('%s: config %s, output %s', args.command, args.config,
        cfg.run.output_dir)
    if args.command == 'solve':
        return cmd_solve(cfg)
    elif args.command == 'compare':
        return cmd_compare(cfg, figures=not args.no_figures)
    elif args.command == 'simulate':
        return cmd_simulate(cfg, args.strategy, args.keep_paths)
    elif args.command == 'impact':
        return cmd_impact(cfg, args.makers, figures=not args.no_figures)
    elif args.command == 'hydro':
        return cmd_hydro(cfg, args.h_list)
    raise ConfigError('unknown command {0!r}'.format(args.command))


def main(argv=None):
    """
    Run the command line; return the exit code.

    """
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        return run_command(args)
    except ValidationError as e:
        print('error: configuration failed validation', file=sys.stderr)
        for check in e.report:
            print('  {0}: {1}'.format(check.name, check.message), file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, PreconditionError, SampleError, ResourceError) as e:
        print('error: {0}'.format(e), file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as e:
        print('numerical failure: {0}'.format(e), file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        print('I/O error: {0}'.format(e), file=sys.stderr)
        return EXIT_IO
