"""
Unit Tests for the configuration loader and the command line

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

import contextlib
import io
import json
import os
import re
import tempfile
import unittest

import hybridexec
from hybridexec import cli
from hybridexec.errors import ConfigError
from hybridexec.tests import examples

# Test Data Helper Functions
#
def scalar_document(**changes):
    """Configuration document of a market without makers"""
    market = dict(examples.TEN_MAKER_SCALARS, makers=[], phi=0.0)
    market['lambda'] = 0.0
    market.update(changes)
    return {'market': market, 'run': {'n_paths': 10, 'dt': 0.01}}


def run_main(argv):
    """Return (exit code, stdout, stderr) of cli.main(argv)"""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


# Classes
#
class LoadRunConfigTests(unittest.TestCase):
    """Verify load_run_config() and the override order"""

    def setUp(self):
        self._dir = tempfile.TemporaryDirectory()
        self.dir = self._dir.name

    def tearDown(self):
        self._dir.cleanup()

    def write(self, doc, name='config.json'):
        path = os.path.join(self.dir, name)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(doc, f)
        return path

    def test_bundled(self):
        cfg = cli.load_run_config('table1', environ={})
        self.assertEqual(cfg.market.n, 10)
        self.assertEqual(cfg.run.seed, 2026)
        self.assertEqual([c.name for c in cfg.strategies],
            ['optimal', 'twap', 'adapted_twap'])
        self.assertIsNone(cfg.run.output_dir)
        self.assertEqual(cfg.schedule.intervals, 4000)

    def test_variant(self):
        cfg = cli.load_run_config('table1', variant='risk_averse_no_feedback',
            environ={})
        self.assertEqual(cfg.market.lam, 0.001)
        self.assertTrue(all(mk.qbar1 == 0 for mk in cfg.market.makers))
        self.assertIn('closed_form_risk_averse',
            [c.name for c in cfg.strategies])
        self.assertEqual(cfg.variant, 'risk_averse_no_feedback')
        with self.assertRaises(ConfigError):
            cli.load_run_config('table1', variant='nope', environ={})

    def test_precedence(self):
        path = self.write(dict(scalar_document(),
            run={'seed': 1, 'output_dir': 'from-file'}))
        cfg = cli.load_run_config(path, environ={})
        self.assertEqual(cfg.run.output_dir, 'from-file')
        cfg = cli.load_run_config(path,
            environ={cli.ENV_OUTPUT_DIR: 'from-env'})
        self.assertEqual(cfg.run.output_dir, 'from-env')
        args = cli.build_parser().parse_args(
            ['compare', path, '--out', 'from-flag', '--seed', '5'])
        cfg = cli.apply_overrides(cfg, args)
        self.assertEqual(cfg.run.output_dir, 'from-flag')
        self.assertEqual(cfg.run.seed, 5)
        self.assertEqual(cfg.run.n_paths, 10000, 'defaults fill the rest')

    def test_default_output_dir(self):
        path = self.write(scalar_document())
        args = cli.build_parser().parse_args(['solve', path])
        cfg = cli.apply_overrides(cli.load_run_config(path, environ={}), args)
        self.assertEqual(cfg.run.output_dir, cli.DEFAULT_OUTPUT_DIR)

    def test_time_step(self):
        self.assertEqual(cli.RunOptions().time_step(2.0), 0.002)
        self.assertEqual(cli.RunOptions(dt=0.5).time_step(2.0), 0.5)

    def test_malformed(self):
        docs = {
            'top key': dict(scalar_document(), extras=1),
            'run key': dict(scalar_document(), run={'paths': 5}),
            'strategy': dict(scalar_document(), strategies=['vwap']),
            'label': dict(scalar_document(), strategies=[
                {'name': 'twap', 'label': 'x'},
                {'name': 'adapted_twap', 'label': 'x'}]),
            'market key': scalar_document(rho=1.0),
            'not an object': [1, 2],
        }
        for label, doc in docs.items():
            with self.subTest(case=label):
                with self.assertRaises(ConfigError):
                    cli.load_run_config(self.write(doc), environ={})

    def test_labels(self):
        path = self.write(dict(scalar_document(), strategies=[
            'twap', {'name': 'twap', 'label': 'twap_again'}]))
        cfg = cli.load_run_config(path, environ={})
        self.assertEqual([c.key for c in cfg.strategies],
            ['twap', 'twap_again'])

    def test_invalid_json(self):
        path = os.path.join(self.dir, 'broken.json')
        with open(path, 'w') as f:
            f.write('{"market": ')
        with self.assertRaises(ConfigError):
            cli.load_run_config(path, environ={})


class CommandTests(unittest.TestCase):
    """Run the subcommands end to end on small problems"""

    def setUp(self):
        self._dir = tempfile.TemporaryDirectory()
        self.dir = self._dir.name

    def tearDown(self):
        self._dir.cleanup()

    def write(self, doc, name='config.json'):
        path = os.path.join(self.dir, name)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(doc, f)
        return path

    def out(self, name):
        return os.path.join(self.dir, name)

    def test_solve_matches_exact_value(self):
        path = self.write(scalar_document())
        code, stdout, _ = run_main(['solve', path, '--out', self.out('s')])
        self.assertEqual(code, cli.EXIT_OK)
        config = examples.scalar_market()
        R, phi = examples.scalar_riccati_exact(config, 0.0)
        expected = R * config.x0 ** 2 + phi
        printed = float(stdout.strip().split('=')[1])
        self.assertAlmostEqual(printed / expected, 1.0, delta=1e-6)
        with open(self.out('s/value.json'), encoding='utf-8') as f:
            doc = json.load(f)
        self.assertEqual(doc['grid_points'], 2001)
        self.assertEqual(doc['method'], 'linearized')
        self.assertTrue(os.path.isfile(self.out('s/riccati.csv')))

    def test_compare(self):
        argv = ['compare', 'table1', '--paths', '20', '--dt', '0.01',
            '--grid-points', '201', '--no-figures', '--seed', '3']
        code, stdout, _ = run_main(argv + ['--out', self.out('a')])
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn('optimal minus', stdout)
        for name in ('outcomes.csv', 'trajectories.csv', 'dominance.csv',
                'summary.json', 'hist_optimal_objective_lq.csv',
                'kde_twap_objective_econ.csv'):
            with self.subTest(name=name):
                self.assertTrue(os.path.isfile(self.out('a/' + name)))
        with open(self.out('a/summary.json'), encoding='utf-8') as f:
            doc = json.load(f)
        self.assertEqual(doc['seed'], 3)
        self.assertEqual(len(doc['dominance']), 2)
        self.assertEqual(run_main(argv + ['--out', self.out('b')])[0], 0)
        with open(self.out('a/outcomes.csv'), 'rb') as f:
            first = f.read()
        with open(self.out('b/outcomes.csv'), 'rb') as f:
            self.assertEqual(first, f.read(), 'same seed, same bytes')

    def test_compare_without_strategies(self):
        path = self.write(scalar_document())
        code, _, err = run_main(['compare', path, '--out', self.out('c')])
        self.assertEqual(code, cli.EXIT_INVALID)
        self.assertIn('no strategies', err)

    def test_simulate(self):
        code, _, _ = run_main(['simulate', 'table1', '--strategy', 'twap',
            '--paths', '5', '--dt', '0.25', '--keep-paths', '2',
            '--out', self.out('sim')])
        self.assertEqual(code, cli.EXIT_OK)
        with open(self.out('sim/paths.csv'), encoding='utf-8') as f:
            rows = f.read().splitlines()
        self.assertEqual(len(rows), 1 + 2 * 5)

    def test_impact_single_maker(self):
        code, _, _ = run_main(['impact', 'table1', '--makers', 'single',
            '--no-figures', '--out', self.out('imp')])
        self.assertEqual(code, cli.EXIT_OK)
        with open(self.out('imp/impact_fit.json'), encoding='utf-8') as f:
            doc = json.load(f)
        self.assertAlmostEqual(doc['decay_rate'], 1.0, delta=1e-3)
        self.assertTrue(doc['single_exponential'])

    def test_hydro(self):
        code, stdout, _ = run_main(['hydro', 'hydro', '--paths', '50',
            '--h', '0.5', '0.25', '--out', self.out('h')])
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn('converged:', stdout)
        with open(self.out('h/hydro_report.json'), encoding='utf-8') as f:
            doc = json.load(f)
        self.assertEqual(doc['n_paths'], 50)
        self.assertEqual(doc['h_list'], [0.5, 0.25])

    def test_hydro_needs_quote_model(self):
        code, _, _ = run_main(['hydro', 'table1', '--out', self.out('h')])
        self.assertEqual(code, cli.EXIT_INVALID)

    def test_validation_failure(self):
        path = self.write(scalar_document(beta=1e-8))
        code, _, err = run_main(['solve', path, '--out', self.out('v')])
        self.assertEqual(code, cli.EXIT_INVALID)
        self.assertIn('beta_gt_half_gamma', err)

    def test_missing_file(self):
        path = os.path.join(self.dir, 'missing.json')
        code, _, err = run_main(['solve', path, '--out', self.out('m')])
        self.assertEqual(code, cli.EXIT_IO)
        self.assertIn(path, err)

    def test_unknown_variant(self):
        code, _, err = run_main(['solve', 'table1', '--variant', 'x',
            '--out', self.out('u')])
        self.assertEqual(code, cli.EXIT_INVALID)
        self.assertIn('risk_averse', err, 'the message lists the variants')

    def test_usage_errors(self):
        for argv in ([], ['solve'], ['simulate', 'table1'],
                ['compare', 'table1', '--paths', 'many']):
            with self.subTest(argv=argv):
                with self.assertRaises(SystemExit) as cm:
                    run_main(argv)
                self.assertEqual(cm.exception.code, 2)


class VersionTests(unittest.TestCase):
    """The package version has a single literal source"""

    def test_version_option(self):
        out = io.StringIO()
        with contextlib.redirect_stdout(out):
            with self.assertRaises(SystemExit) as cm:
                cli.main(['--version'])
        self.assertEqual(cm.exception.code, 0)
        self.assertEqual(out.getvalue().strip(), hybridexec.__version__)

    def test_packaging_reads_package_version(self):
        path = os.path.join(os.path.dirname(hybridexec.__file__),
            '__init__.py')
        with open(path) as f:
            found = re.search(r"^__version__ = '([^']+)'", f.read(),
                re.MULTILINE)
        self.assertIsNotNone(found, 'setup.py parses this assignment')
        self.assertEqual(found.group(1), hybridexec.__version__)


if __name__ == '__main__':
    unittest.main()
