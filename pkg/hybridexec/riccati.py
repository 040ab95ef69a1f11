"""
Riccati solvers for the quadratic value function

The value function of the liquidation problem is quadratic in the
state, w(t, x) = x'R(t)x + r(t)'x + phi(t). R solves a matrix Riccati
equation backward from R(T) = G; r and phi solve linear equations
driven by R. Two solvers are provided for R:

* solve_riccati_linearized() - exponentiates the doubled (Hamiltonian)
  system and recovers R from R N = M at every grid point.

* integrate_riccati_direct() - fixed-step fourth-order Runge-Kutta
  on the Riccati equation itself.

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
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from hybridexec.errors import DivergenceError, MatrixOverflowError, \
    NumericalWarning, OutOfRangeError, OutputError, SingularSystemError
from hybridexec.model import build_state_matrices, derive_effective_params

log = logging.getLogger(__name__)

DEFAULT_INTERVALS = 2000
CONDITION_LIMIT = 1e12
DIVERGENCE_BOUND = 1e12
DIRECT_SUBSTEPS = 8
LINEAR_SUBSTEPS = 4

# Matrix Exponential
#
# Scaling and squaring with diagonal Pade approximants, after Higham,
# "The scaling and squaring method for the matrix exponential
# revisited" (2005). Coefficients b_0..b_13 of the degree-13
# approximant; lower degrees use the leading entries.
#
_PADE_B = (
    64764752532480000., 32382376266240000., 7771770303897600.,
    1187353796428800., 129060195264000., 10559470521600.,
    670442572800., 33522128640., 1323241920., 40840800., 960960.,
    16380., 182., 1.,
)
_PADE_B_LOW = {
    3: (120., 60., 12., 1.),
    5: (30240., 15120., 3360., 420., 30., 1.),
    7: (17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.),
    9: (
        17643225600., 8821612800., 2075673600., 302702400., 30270240.,
        2162160., 110880., 3960., 90., 1.,
    ),
}
_PADE_THETA = (
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
)
_MAX_SQUARINGS = 1000


def _pade_low(a, ident, order):
    b = _PADE_B_LOW[order]
    a2 = a @ a
    powers = [ident, a2]
    for _ in range(2, order // 2 + 1):
        powers.append(powers[-1] @ a2)
    u = sum(b[2 * j + 1] * powers[j] for j in range(len(powers)))
    v = sum(b[2 * j] * powers[j] for j in range(len(powers)))
    return a @ u, v


def _pade13(a, ident):
    b = _PADE_B
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (
        a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
        + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident
    )
    v = (
        a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
        + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    )
    return u, v


def matrix_exponential(mat):
    """
    Return exp(mat) for a square matrix.

    The lowest Pade degree whose error bound covers the 1-norm of the
    matrix is used; beyond the range of the degree-13 approximant the
    matrix is scaled by a power of two and the result squared back.
    No eigendecomposition is involved, so defective matrices (repeated
    or zero eigenvalues without a full set of eigenvectors) are
    handled like any other.

    Required Arguments
    ------------------
    * mat - square matrix with finite entries. Accepts array-like.

    Exceptions
    ----------
    * ValueError - when mat is not square or has non-finite entries.

    * MatrixOverflowError - when the norm of mat needs more squarings
      than the floating point range allows, or the result overflows.

    Examples
    --------
    ::

      >>> matrix_exponential([[0., 1.], [0., 0.]])
      array([[1., 1.],
             [0., 1.]])

    """
    a = np.array(mat, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError('matrix must be square, got shape {0}'.format(a.shape))
    if not np.all(np.isfinite(a)):
        raise ValueError('matrix has non-finite entries')
    ident = np.eye(a.shape[0])
    norm = np.linalg.norm(a, 1)
    for order, theta in _PADE_THETA[:-1]:
        if norm <= theta:
            u, v = _pade_low(a, ident, order)
            return linalg.solve(v - u, v + u)
    theta13 = _PADE_THETA[-1][1]
    squarings = max(0, int(math.ceil(math.log2(norm / theta13)))) \
        if norm > theta13 else 0
    if squarings > _MAX_SQUARINGS:
        msg = 'matrix 1-norm {0:.3e} is beyond the safe range'.format(norm)
        raise MatrixOverflowError(msg)
    u, v = _pade13(a / 2.0 ** squarings, ident)
    out = linalg.lu_solve(linalg.lu_factor(v - u), v + u)
    for _ in range(squarings):
        out = out @ out
    if not np.all(np.isfinite(out)):
        raise MatrixOverflowError('matrix exponential overflowed')
    return out


# Classes
#
@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """
    Coefficients of the quadratic value function on a time grid.

    Fields
    ------
    * grid - strictly increasing times, grid[-1] == T.
    * R - array of shape (K, n+1, n+1), symmetric per grid point.
    * r - array of shape (K, n+1); zeros until solve_linear_terms().
    * phi - array of shape (K,); zeros until solve_linear_terms().
    * method - 'linearized' or 'direct'.

    """
    grid: np.ndarray
    R: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    method: str

    def __post_init__(self):
        for name in ('grid', 'R', 'r', 'phi'):
            getattr(self, name).setflags(write=False)

    @property
    def horizon(self):
        return float(self.grid[-1])

    def with_linear_terms(self, r, phi):
        """Return a copy of this solution carrying r and phi"""
        return dataclasses.replace(
            self, r=np.array(r, dtype=float), phi=np.array(phi, dtype=float)
        )

    def locate(self, t):
        """
        Return (j, w) such that t = (1-w) grid[j] + w grid[j+1], for
        linear interpolation between grid points.

        Exceptions
        ----------
        * OutOfRangeError - when t lies outside [grid[0], grid[-1]].

        """
        grid = self.grid
        tol = 1e-12 * max(1.0, abs(grid[-1]))
        if t < grid[0] - tol or t > grid[-1] + tol or not np.isfinite(t):
            msg = 't={0} outside solution range [{1}, {2}]'.format(
                t, grid[0], grid[-1]
            )
            raise OutOfRangeError(msg)
        j = int(np.searchsorted(grid, t, side='right')) - 1
        j = min(max(j, 0), len(grid) - 2)
        w = (t - grid[j]) / (grid[j + 1] - grid[j])
        return j, min(max(w, 0.0), 1.0)

    def coefficients(self, t):
        """Return (R, r, phi) at time t, linearly interpolated"""
        j, w = self.locate(t)
        if w == 0.0:
            return self.R[j], self.r[j], float(self.phi[j])
        R = (1 - w) * self.R[j] + w * self.R[j + 1]
        r = (1 - w) * self.r[j] + w * self.r[j + 1]
        phi = (1 - w) * self.phi[j] + w * self.phi[j + 1]
        return R, r, float(phi)


@dataclass(frozen=True, eq=False)
class DoubledFlow:
    """
    The linear system doubling the Riccati equation.

    [M(t); N(t)] = exp(-(T-t) Psi) [G; I], with R(t) N(t) = M(t).

    Fields
    ------
    * Psi - the 2(n+1) x 2(n+1) block matrix.
    * M, N - arrays of shape (K, n+1, n+1), one block per grid point.
    * scale - the balancing factor d used while exponentiating.

    """
    grid: np.ndarray
    Psi: np.ndarray
    M: np.ndarray
    N: np.ndarray
    scale: float


# Functions
#
def make_grid(horizon, intervals=DEFAULT_INTERVALS, grading=None):
    """
    Return a time grid on [0, horizon] with the given number of
    intervals.

    Optional Arguments
    ------------------
    * intervals - number of intervals; the grid has intervals+1
      points. Default is 2000.

    * grading - None for a uniform grid. Otherwise a positive time
      scale tau0: the times to maturity T - t are spaced
      geometrically, tau_j = tau0 ((1 + T/tau0)^(j/K) - 1), so that
      the step near T is about tau0 times the relative step. Use the
      scale on which R varies near T (e.g. the adapted-TWAP alpha).

    """
    if intervals < 1:
        raise ValueError('intervals must be >= 1, got {0}'.format(intervals))
    if not horizon > 0:
        raise ValueError('horizon must be > 0, got {0}'.format(horizon))
    if grading is None:
        grid = np.linspace(0.0, horizon, intervals + 1)
    else:
        if not grading > 0:
            raise ValueError('grading must be > 0, got {0}'.format(grading))
        frac = np.linspace(0.0, 1.0, intervals + 1)
        tau = grading * np.expm1(frac * math.log1p(horizon / grading))
        grid = horizon - tau[::-1]
        grid[0] = 0.0
    grid[-1] = horizon
    return grid


def _drift_terms(mats, eff):
    """
    Return (B, C, S) of the Riccati vector field
    F(R) = C - B'R - R B - R S R.

    """
    et = eff.eta_tilde
    B = mats.A + np.outer(mats.a, mats.k) / et
    C = eff.psi * np.outer(mats.e_last, mats.e_last) \
        - np.outer(mats.k, mats.k) / et
    S = np.outer(mats.a, mats.a) / et
    return B, C, S


def riccati_vector_field(R, mats, eff, _terms=None):
    """
    Time derivative of R prescribed by the Riccati equation,

      dR/dt = psi e e' - (1/eta_tilde){R a a' R
              + (eta_tilde A + a k')'R + R(eta_tilde A + a k') + k k'}

    with e the last unit vector.

    """
    B, C, S = _terms if _terms is not None else _drift_terms(mats, eff)
    BR = B.T @ R
    return C - BR - BR.T - R @ S @ R


def hamiltonian_matrix(mats, eff):
    """
    Return the block matrix Psi of the doubled system,

      Psi = [[-(A + a k'/eta_tilde)',  psi e e' - k k'/eta_tilde],
             [a a'/eta_tilde,           A + a k'/eta_tilde      ]]

    """
    B, C, S = _drift_terms(mats, eff)
    return np.block([[-B.T, C], [S, B]])


def _balance_scale(mats, eff):
    _, C, S = _drift_terms(mats, eff)
    norm_c = np.linalg.norm(C, 1)
    norm_s = np.linalg.norm(S, 1)
    norm_g = np.linalg.norm(mats.G, 1)
    d = math.sqrt(norm_c / norm_s) if norm_c > 0 and norm_s > 0 else 0.0
    d = max(d, 1e-3 * norm_g)
    return d if d > 0 else 1.0


def doubled_flow(mats, eff, grid):
    """
    Propagate [M; N] from [G; I] at T to every grid point.

    The exponent is balanced by the similarity diag(d I, I) before
    exponentiation; M is returned in original units.

    """
    grid = np.asarray(grid, dtype=float)
    dim = mats.dim
    horizon = grid[-1]
    Psi = hamiltonian_matrix(mats, eff)
    d = _balance_scale(mats, eff)
    Psi_hat = Psi.copy()
    Psi_hat[:dim, dim:] /= d
    Psi_hat[dim:, :dim] *= d
    start = np.vstack([mats.G / d, np.eye(dim)])
    M = np.empty((len(grid), dim, dim))
    N = np.empty((len(grid), dim, dim))
    for j, t in enumerate(grid):
        tau = horizon - t
        if tau == 0.0:
            top = start
        else:
            top = matrix_exponential(-tau * Psi_hat) @ start
        M[j] = d * top[:dim]
        N[j] = top[dim:]
    return DoubledFlow(grid=grid, Psi=Psi, M=M, N=N, scale=d)


def solve_riccati_linearized(mats, eff, grid, condition_limit=CONDITION_LIMIT):
    """
    Solve the Riccati equation for R by linearization.

    At every grid point R(t) is recovered from R N = M by solving the
    transposed system N' R' = M' with partial pivoting; N is never
    inverted explicitly.

    Required Arguments
    ------------------
    * mats - StateMatrices.
    * eff - EffectiveParams.
    * grid - strictly increasing times covering [0, T].

    Optional Arguments
    ------------------
    * condition_limit - largest acceptable 2-norm condition number of
      N(t). Default is 1e12.

    Exceptions
    ----------
    * SingularSystemError - when N(t) is too ill-conditioned at some
      grid time. The error carries that time.

    """
    flow = doubled_flow(mats, eff, grid)
    dim = mats.dim
    R = np.empty((len(flow.grid), dim, dim))
    for j, t in enumerate(flow.grid):
        N = flow.N[j]
        cond = np.linalg.cond(N)
        if not cond < condition_limit:
            raise SingularSystemError(float(t), float(cond))
        Rt = linalg.lu_solve(linalg.lu_factor(N.T), flow.M[j].T).T
        R[j] = 0.5 * (Rt + Rt.T)
    R[-1] = mats.G
    log.debug('linearized Riccati solve on %d points', len(flow.grid))
    return RiccatiSolution(
        grid=flow.grid, R=R, r=np.zeros((len(flow.grid), dim)),
        phi=np.zeros(len(flow.grid)), method='linearized',
    )


def integrate_riccati_direct(
    mats, eff, grid, substeps=DIRECT_SUBSTEPS, bound=DIVERGENCE_BOUND
):
    """
    Solve the Riccati equation for R by backward Runge-Kutta
    integration from R(T) = G.

    Each grid interval is covered by `substeps` equal RK4 steps, and
    R is symmetrized (averaged with its transpose) after every step.

    Optional Arguments
    ------------------
    * substeps - RK4 steps per grid interval. Default is 8.
    * bound - largest acceptable entry magnitude. Default is 1e12.

    Exceptions
    ----------
    * DivergenceError - when an entry of R exceeds bound or becomes
      non-finite; the error carries the time of the blow-up.

    """
    grid = np.asarray(grid, dtype=float)
    dim = mats.dim
    terms = _drift_terms(mats, eff)
    out = np.empty((len(grid), dim, dim))
    R = np.array(mats.G, dtype=float)
    out[-1] = R
    for j in range(len(grid) - 1, 0, -1):
        h = (grid[j] - grid[j - 1]) / substeps
        for s in range(substeps):
            k1 = riccati_vector_field(R, mats, eff, terms)
            k2 = riccati_vector_field(R - 0.5 * h * k1, mats, eff, terms)
            k3 = riccati_vector_field(R - 0.5 * h * k2, mats, eff, terms)
            k4 = riccati_vector_field(R - h * k3, mats, eff, terms)
            R = R - (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            R = 0.5 * (R + R.T)
        peak = np.max(np.abs(R))
        if not peak <= bound:
            raise DivergenceError(float(grid[j - 1]), bound)
        out[j - 1] = R
    log.debug('direct Riccati integration on %d points', len(grid))
    return RiccatiSolution(
        grid=grid, R=out, r=np.zeros((len(grid), dim)),
        phi=np.zeros(len(grid)), method='direct',
    )


def _hermite(R0, F0, R1, F1, h, s):
    # cubic Hermite interpolant on [t0, t0+h] at fraction s
    s2, s3 = s * s, s * s * s
    return (
        (2 * s3 - 3 * s2 + 1) * R0 + (s3 - 2 * s2 + s) * h * F0
        + (-2 * s3 + 3 * s2) * R1 + (s3 - s2) * h * F1
    )


def solve_linear_terms(mats, eff, sol, mu, substeps=LINEAR_SUBSTEPS):
    """
    Integrate r and phi backward from r(T) = 0, phi(T) = 0 along a
    solution for R:

      dr/dt   = -[A'r + 2Rb + mu e + (1/eta_tilde)(R a a' + k a') r]
      dphi/dt = -[tr(Sigma Sigma' R) + b'r + (a'r)^2 / (4 eta_tilde)]

    where e is the last unit vector. R between grid points is taken
    from the cubic Hermite interpolant whose end slopes are given by
    the Riccati vector field.

    Returns (r, phi) as arrays over the grid of sol.

    """
    grid = sol.grid
    dim = mats.dim
    et = eff.eta_tilde
    terms = _drift_terms(mats, eff)
    SS = mats.Sigma @ mats.Sigma.T
    a, b, k = mats.a, mats.b, mats.k
    source = mu * mats.e_last

    def rhs(R, r, phi):
        L = mats.A.T + np.outer(R @ a + k, a) / et
        dr = -(L @ r + 2.0 * (R @ b) + source)
        ar = a @ r
        dphi = -(np.sum(SS * R) + b @ r + ar * ar / (4.0 * et))
        return dr, dphi

    r_out = np.zeros((len(grid), dim))
    phi_out = np.zeros(len(grid))
    r = np.zeros(dim)
    phi = 0.0
    slopes = [riccati_vector_field(R, mats, eff, terms) for R in sol.R]
    for j in range(len(grid) - 1, 0, -1):
        width = grid[j] - grid[j - 1]
        R0, F0, R1, F1 = sol.R[j - 1], slopes[j - 1], sol.R[j], slopes[j]
        h = width / substeps
        for s in range(substeps):
            # fractions of the interval, measured from grid[j-1]
            top = 1.0 - s / substeps
            mid = top - 0.5 / substeps
            bot = top - 1.0 / substeps
            R_top = _hermite(R0, F0, R1, F1, width, top)
            R_mid = _hermite(R0, F0, R1, F1, width, mid)
            R_bot = _hermite(R0, F0, R1, F1, width, bot)
            k1r, k1p = rhs(R_top, r, phi)
            k2r, k2p = rhs(R_mid, r - 0.5 * h * k1r, phi - 0.5 * h * k1p)
            k3r, k3p = rhs(R_mid, r - 0.5 * h * k2r, phi - 0.5 * h * k2p)
            k4r, k4p = rhs(R_bot, r - h * k3r, phi - h * k3p)
            r = r - (h / 6.0) * (k1r + 2 * k2r + 2 * k3r + k4r)
            phi = phi - (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        r_out[j - 1] = r
        phi_out[j - 1] = phi
    return r_out, phi_out


def solve_riccati(mats, eff, grid, method='linearized', mu=0.0):
    """
    Return the complete solution (R, r, phi) on grid.

    With method='linearized', a near-singular N(t) makes the solver
    fall back to direct integration; the fallback is logged and
    signalled with a NumericalWarning.

    """
    if method == 'linearized':
        try:
            sol = solve_riccati_linearized(mats, eff, grid)
        except SingularSystemError as e:
            msg = 'linearized solver failed ({0}); integrating directly'
            log.warning(msg.format(e))
            warnings.warn(msg.format(e), NumericalWarning, stacklevel=2)
            sol = integrate_riccati_direct(mats, eff, grid)
    elif method == 'direct':
        sol = integrate_riccati_direct(mats, eff, grid)
    else:
        raise ValueError('unknown solver method: {0!r}'.format(method))
    log.info(
        'Riccati solution (%s) on %d grid points', sol.method, len(sol.grid)
    )
    return full_solution(mats, eff, sol, mu)


def full_solution(mats, eff, sol, mu):
    """Return sol completed with r and phi from solve_linear_terms()"""
    r, phi = solve_linear_terms(mats, eff, sol, mu)
    return sol.with_linear_terms(r, phi)


def solve_model(config, intervals=DEFAULT_INTERVALS, method='linearized',
        grading=None):
    """
    Convenience wrapper: derive the coefficients of config and solve.

    Returns (mats, eff, sol).

    """
    eff = derive_effective_params(config)
    mats = build_state_matrices(config, eff)
    grid = make_grid(config.horizon, intervals, grading)
    sol = solve_riccati(mats, eff, grid, method=method, mu=config.mu)
    return mats, eff, sol


def value_function(t, x, sol):
    """
    Return w(t, x) = x'R(t)x + r(t)'x + phi(t), with the coefficients
    linearly interpolated between grid points.

    Exceptions
    ----------
    * OutOfRangeError - when t is outside the solution's time range.

    """
    R, r, phi = sol.coefficients(t)
    x = np.asarray(x, dtype=float)
    return float(x @ R @ x + r @ x + phi)


def riccati_residual(sol, mats, eff, t, relative=False):
    """
    Return the Frobenius norm of the Riccati equation residual at the
    interior grid time t, with dR/dt estimated by the three-point
    central difference (second-order on non-uniform grids too).

    Optional Arguments
    ------------------
    * relative - when True, divide by the Frobenius norm of the
      Riccati vector field at t, giving a dimensionless residual.

    Exceptions
    ----------
    * OutOfRangeError - when t is not an interior grid point.

    """
    grid = sol.grid
    j = int(np.argmin(np.abs(grid - t)))
    tol = 1e-9 * (grid[-1] - grid[0]) / max(len(grid) - 1, 1)
    if abs(grid[j] - t) > tol or j == 0 or j == len(grid) - 1:
        raise OutOfRangeError('t={0} is not an interior grid point'.format(t))
    h1 = grid[j] - grid[j - 1]
    h2 = grid[j + 1] - grid[j]
    Rm, R0, Rp = sol.R[j - 1], sol.R[j], sol.R[j + 1]
    dR = (h1 * h1 * Rp - h2 * h2 * Rm + (h2 * h2 - h1 * h1) * R0) \
        / (h1 * h2 * (h1 + h2))
    field = riccati_vector_field(R0, mats, eff)
    res = float(np.linalg.norm(dR - field))
    if relative:
        scale = float(np.linalg.norm(field))
        return res / scale if scale > 0 else res
    return res


def solution_rows(sol):
    """
    Yield the CSV header and one row per grid point:
    t, upper triangle of R (row major), r, phi.

    """
    dim = sol.R.shape[1]
    iu = np.triu_indices(dim)
    header = ['t']
    header += ['R_{0}_{1}'.format(i + 1, j + 1) for i, j in zip(*iu)]
    header += ['r_{0}'.format(i + 1) for i in range(dim)]
    header.append('phi')
    yield header
    for j, t in enumerate(sol.grid):
        row = [repr(float(t))]
        row += [repr(float(v)) for v in sol.R[j][iu]]
        row += [repr(float(v)) for v in sol.r[j]]
        row.append(repr(float(sol.phi[j])))
        yield row


def write_solution_csv(sol, path):
    """Write solution_rows(sol) to path as RFC-4180 CSV"""
    try:
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\r\n')
            writer.writerows(solution_rows(sol))
    except OSError as e:
        raise OutputError('cannot write {0}: {1}'.format(path, e)) from e
