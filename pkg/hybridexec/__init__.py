"""
Hybrid-Impact Execution Library

Optimal liquidation under permanent, temporary and market-maker
inventory impact: Riccati solvers, closed-form trading rates,
benchmark strategies and a Monte Carlo engine with common random
numbers.

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

__version__ = '0.1.dev0'

logging.getLogger(__name__).addHandler(logging.NullHandler())
