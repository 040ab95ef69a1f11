"""
Exceptions and warnings raised by hybridexec

Every exception also derives from the built-in exception normally
raised for the same kind of problem, so that code catching ValueError,
ArithmeticError, IndexError or OSError keeps working.

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

# Warnings
#
class NumericalWarning(UserWarning):
    """Recoverable numerical trouble, such as a solver fallback"""


# Classes
#
class HybridExecError(Exception):
    """Root of all hybridexec exceptions"""


class ConfigError(HybridExecError, ValueError):
    """A configuration document or object is malformed"""


class ValidationError(ConfigError):
    """
    A configuration failed one or more required model conditions.

    Arguments
    ---------
    * report - the list of failed checks, as returned by
      hybridexec.model.validate_config(). Each check has a name and
      a message.

    """
    def __init__(self, report):
        self.report = tuple(report)
        failed = [c for c in self.report if not c.passed]
        lines = ["{0}: {1}".format(c.name, c.message) for c in failed]
        msg = 'configuration failed {0} check(s): {1}'.format(
            len(failed), '; '.join(lines)
        )
        super().__init__(msg)


class PreconditionError(HybridExecError, ValueError):
    """A strategy or computation was requested outside its domain"""


class SampleError(HybridExecError, ValueError):
    """A sample is too small or too degenerate for a statistic"""


class OutOfRangeError(HybridExecError, IndexError):
    """A time or index lies outside the range covered by a solution"""


class OutputError(HybridExecError, OSError):
    """An input file is missing or an output location is not writable"""


class ResourceError(HybridExecError, MemoryError):
    """A request would exceed the configured memory budget"""


class NumericalError(HybridExecError, ArithmeticError):
    """Root of numerical failures"""


class SingularSystemError(NumericalError):
    """
    The lower block N(t) of the linearized Riccati flow is too
    ill-conditioned to solve R(t)N(t) = M(t).

    """
    def __init__(self, time, condition):
        self.time = time
        self.condition = condition
        msg_format = 'N(t) near-singular at t={0:.6g} (condition {1:.3e})'
        super().__init__(msg_format.format(time, condition))


class DivergenceError(NumericalError):
    """Direct integration of the Riccati equation blew up"""
    def __init__(self, time, bound):
        self.time = time
        self.bound = bound
        msg_format = 'Riccati solution exceeded {0:.3e} at t={1:.6g}'
        super().__init__(msg_format.format(bound, time))


class MatrixOverflowError(NumericalError, OverflowError):
    """A matrix norm is beyond the safe range of the exponential"""


class NonFiniteStateError(NumericalError):
    """A simulated state became infinite or NaN"""
    def __init__(self, step, path=None):
        self.step = step
        self.path = path
        if path is None:
            msg = 'non-finite state at step {0}'.format(step)
        else:
            msg = 'non-finite state at step {0} of path {1}'.format(
                step, path
            )
        super().__init__(msg)


class EventCapError(NumericalError):
    """The jump simulation exceeded its event safety cap"""
    def __init__(self, cap, h):
        self.cap = cap
        self.h = h
        msg_format = 'more than {0} events on a path with h={1}'
        super().__init__(msg_format.format(cap, h))


class FitError(NumericalError):
    """An exponential decay fit is not meaningful for the given curve"""
