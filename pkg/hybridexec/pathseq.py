"""
Addressable noise sequences for Monte Carlo paths

Each sequence is subscriptable and lazily evaluated: term i holds the
random draws of path i, derived on demand from a counter-based
generator keyed by (seed, i). Any path may therefore be regenerated
alone, in any order, by any worker, and comes out bit-identical.
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

# Functions
#
def path_generator(seed, i, salt=None):
    """
    Return the numpy Generator of path i.

    The generator is a Philox bit generator seeded through
    SeedSequence(seed, spawn_key=(i,)), or spawn_key=(salt, i) when a
    salt is given so that independent draws can be made for the same
    path.

    Arguments
    ---------
    * seed - master seed. Accepts int >= 0.

    * i - path index. Accepts int >= 0.

    * salt - optional int distinguishing independent uses.

    """
    key = (int(i),) if salt is None else (int(salt), int(i))
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key))
    )


# Classes
#
class NoiseSequence(object):
    """
    Subscriptable Lazily-Evaluated Sequence of Per-Path Draws

    Terms are derived by calling func(i) with the (non-negative)
    index of the term. Negative indices count from the end, and
    slices return tuples of terms, as with Python's own sequences.

    Arguments
    ---------
    * func - function deriving term i. Accepts a callable taking a
      single int.

    * length - number of terms. Accepts int >= 0.

    Examples
    --------
    ::

      >>> seq = NoiseSequence(lambda i: i * i, 4)
      >>> seq[-1]
      9
      >>> seq[1:3]
      (1, 4)

    """
    # Private Methods
    #
    def _check_i(self, i):
        """
        Raise an IndexError if external index i is out of range.

        """
        if i >= self._len or i < -self._len:
            raise IndexError('path index {0} out of range'.format(i))

    def _get_args(self):
        re_arg_fmt = "func={0}, length={1}"
        return re_arg_fmt.format(
            getattr(self._func, '__name__', repr(self._func)), self._len
        )

    def _get_term(self, i):
        self._check_i(i)
        return self._func(self._resolve_i(i))

    def _get_terms(self, s):
        return tuple(
            self._get_term(ii) for ii in range(*self._resolve_slice(s))
        )

    def _resolve_i(self, i):
        """
        Remap a possibly negative external index to a term index.

        """
        if i < 0:
            return self._len + i
            # PROTIP: Add with a negative to subtract from
            #  its magnitude
        return i

    def _resolve_slice(self, s):
        """
        Return (start, stop, step) of slice s clamped to this sequence,
        as a tuple for use with range().

        """
        return s.indices(self._len)

    # Special Methods and Constructor
    #
    def __getitem__(self, key):
        """
        Exceptions
        ----------
        * TypeError - when key is not an int or a slice.

        """
        if isinstance(key, (int, np.integer)):
            return self._get_term(int(key))
        elif isinstance(key, slice):
            return self._get_terms(key)
        else:
            raise TypeError('indices must be int or slice')

    def __iter__(self):
        self._i = 0
        return self

    def __len__(self):
        return self._len

    def __next__(self):
        if self._i >= self._len:
            raise StopIteration
        out = self[self._i]
        self._i += 1
        return out

    def __repr__(self):
        return "{0}({1})".format(self.__class__.__name__, self._get_args())

    def __init__(self, func, length):
        self._func = func
            # Derives the term of a given index
        self._i = 0
            # Index when used as iterator
        self._len = int(length)
        if self._len < 0:
            raise ValueError('sequence length must be zero or more')


class BrownianSequence(NoiseSequence):
    """
    Brownian increments of a batch of paths.

    Term i is an array of shape (n_steps, dims) of independent normal
    increments with variance dt; column order for the execution model
    is (dB_Q, dB_X, dB_S).

    Arguments
    ---------
    * n_paths - number of paths (terms).

    * n_steps - number of time steps per path.

    * dt - time step; increments have standard deviation sqrt(dt).

    * seed - master seed.

    * dims - number of independent Brownian motions. Default is 3.

    """
    def block(self, start, stop):
        """
        Return the increments of paths start..stop-1 stacked into an
        array of shape (stop-start, n_steps, dims).

        """
        if stop <= start:
            return np.empty((0, self.n_steps, self.dims))
        return np.stack([self[i] for i in range(start, stop)])

    def _draw(self, i):
        rng = path_generator(self.seed, i)
        return rng.standard_normal((self.n_steps, self.dims)) * self._scale

    def _get_args(self):
        re_arg_fmt = "n_paths={0}, n_steps={1}, dt={2!r}, seed={3}, dims={4}"
        return re_arg_fmt.format(
            self._len, self.n_steps, self.dt, self.seed, self.dims
        )

    def __init__(self, n_paths, n_steps, dt, seed, dims=3):
        if not dt > 0:
            raise ValueError('dt must be > 0, got {0}'.format(dt))
        self.n_steps = int(n_steps)
        self.dt = float(dt)
        self.seed = int(seed)
        self.dims = int(dims)
        self._scale = math.sqrt(self.dt)
        super().__init__(self._draw, n_paths)


class UniformStreams(object):
    """
    Running uniform streams of a contiguous range of paths.

    Each path owns one generator; take() hands out the next rows of
    the paths asked for and advances only those. The rows a path
    receives are the same however they are split into calls.

    """
    def take(self, local, n_rows):
        """
        Return the next n_rows rows of (dims,) uniforms on (0, 1] for
        each local path index in local, as an array of shape
        (len(local), n_rows, dims).

        """
        out = np.empty((len(local), int(n_rows), self.dims))
        for k, j in enumerate(local):
            out[k] = 1.0 - self._gens[j].random((int(n_rows), self.dims))
                # random() is on [0, 1); log(u) stays finite on (0, 1]
        return out

    def __len__(self):
        return len(self._gens)

    def __init__(self, gens, dims):
        self._gens = list(gens)
        self.dims = int(dims)


class UniformSequence(NoiseSequence):
    """
    Uniform streams for event-driven path simulation.

    Term i is a fresh generator of path i under the given salt; every
    access starts the stream from its beginning. Event simulations
    consume one row of dims uniforms per event through streams(),
    which reads the stream in windows instead of drawing every row a
    path could need up front.

    Arguments
    ---------
    * n_paths - number of paths (terms).

    * seed - master seed.

    * salt - separates these streams from other uses of the same
      seed. Default is 1.

    * dims - uniforms per row. Default is 2.

    """
    def streams(self, start, stop):
        """Return the UniformStreams of paths start..stop-1"""
        return UniformStreams(
            (self[i] for i in range(start, max(start, stop))), self.dims
        )

    def _draw(self, i):
        return path_generator(self.seed, i, salt=self.salt)

    def _get_args(self):
        re_arg_fmt = "n_paths={0}, seed={1}, salt={2}, dims={3}"
        return re_arg_fmt.format(self._len, self.seed, self.salt, self.dims)

    def __init__(self, n_paths, seed, salt=1, dims=2):
        self.seed = int(seed)
        self.salt = int(salt)
        self.dims = int(dims)
        super().__init__(self._draw, n_paths)
