"""Nonlinear wedge minimization: reference energies, sweeps, slopes.

For openings that bind (mu above the corner threshold) the minimizer is
reached by conjugate-gradient descent from the scaled linear ground
mode, whose optimal ray amplitude is available in closed form; a
seeded random restart guards against spurious local minima and restart
disagreements are reported, not resolved.  Below the threshold the zero
field is the exact minimizer and is returned as such.

Sweeps in mu reuse one assembled operator and warm-start each member
from its neighbor; slopes come from the envelope identity (the mu
partial derivative at the minimizer) and from one-sided difference
quotients, whose disagreement locates candidate kinks of the concave
energy curve.
"""

import math
from dataclasses import dataclass

import numpy as np

from .descent import minimize_quartic_energy
from .errors import ParameterError, SolverError
from .operators import energy, supnorm
from .eigen import smallest_eigenpair
from .spectral import (DEFAULT_RADIUS, DEFAULT_STEP, _map, sector_operator,
                       theta0_gate)


@dataclass
class DecayFit:
    rate: float                   # fitted tail rate of |u|, None if undefined
    quality: float                # R^2 of the log-linear shell fit
    defined: bool
    slope: float = None           # raw log-density slope
    shells: int = 0


@dataclass
class SectorSolution:
    mu: float
    alpha: float
    energy: float
    field: np.ndarray
    grid: object
    links: object
    ghosts: np.ndarray
    breakdown: object
    grad_norm: float
    iterations: int
    decay: DecayFit
    radius: float
    step: float
    threshold: float              # discrete ground eigenvalue at this resolution
    restart_gap: float = 0.0      # energy disagreement between starts
    trivial: bool = False

    @property
    def sup(self):
        return supnorm(self.field)


def linear_mode_trial(kinetic_q, m2, m4, mu):
    """Closed-form optimum of the energy along the ray t * phi.

    Given the Rayleigh numerator q = <phi, K phi> and the masses of phi,
    the optimal amplitude satisfies t^2 = (mu m2 - q) / (mu m4), clipped
    at zero; returns (t^2, ray energy at the optimum).
    """
    tstar2 = (mu * m2 - kinetic_q) / (mu * m4)
    if tstar2 <= 0.0:
        return 0.0, 0.0
    e = tstar2 * (kinetic_q - mu * m2) + 0.5 * mu * tstar2 ** 2 * m4
    return tstar2, e


def decay_rate(field, grid, radius, center=(0.0, 0.0), shell_width=None):
    """Log-linear tail fit of shell-averaged |u|^2 over [0.2 R, 0.8 R].

    The fitted rate is -slope/2, i.e. the modulus decay exponent.  A
    numerically zero field (or too few populated shells) yields the
    undefined-rate signal instead of a number.
    """
    w = np.asarray(field, dtype=complex)
    dens = np.abs(w) ** 2
    total = float(np.sum(grid.quad_weights() * dens))
    if total < 1e-20:
        return DecayFit(rate=None, quality=0.0, defined=False)
    xy = grid.node_xy()
    r = np.hypot(xy[:, 0] - center[0], xy[:, 1] - center[1])
    width = shell_width if shell_width else max(2.0 * grid.step, 0.02 * radius)
    lo, hi = 0.2 * radius, 0.8 * radius
    nb = max(3, int((hi - lo) / width))
    edges = np.linspace(lo, hi, nb + 1)
    mids, avgs = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (r >= a) & (r < b)
        if sel.any():
            m = float(dens[sel].mean())
            if m > 1e-290:
                mids.append(0.5 * (a + b))
                avgs.append(m)
    if len(mids) < 3:
        return DecayFit(rate=None, quality=0.0, defined=False)
    x = np.asarray(mids)
    y = np.log(np.asarray(avgs))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sstot = float(np.sum((y - y.mean()) ** 2))
    quality = 1.0 - float(np.sum(resid ** 2)) / sstot if sstot > 0 else 1.0
    return DecayFit(rate=-0.5 * float(slope), quality=quality, defined=True,
                    slope=float(slope), shells=len(mids))


def _zero_solution(mu, alpha, grid, links, ghosts, lam, radius, step):
    n = grid.n_nodes
    w = np.zeros(n, dtype=complex)
    br = energy(grid, w, links, (-mu, 0.5 * mu), ghosts=ghosts)
    return SectorSolution(mu=mu, alpha=alpha, energy=0.0, field=w, grid=grid,
                          links=links, ghosts=ghosts, breakdown=br,
                          grad_norm=0.0, iterations=0,
                          decay=DecayFit(rate=None, quality=0.0, defined=False),
                          radius=radius, step=step, threshold=lam,
                          trivial=True)


def minimize_sector(mu, alpha, radius=DEFAULT_RADIUS, step=DEFAULT_STEP,
                    tol=1e-8, seed=0, maxiter=40000, restart=True,
                    w0=None, operator=None, ground=None):
    """Ground state of the wedge energy at (mu, alpha).

    ``operator`` optionally carries a prebuilt (grid, links, K, q,
    ghosts) tuple and ``ground`` the matching smallest eigenpair, so
    sweeps can amortize assembly and the eigensolve.  ``w0`` overrides
    the initialization policy (used for warm starts); otherwise descent
    starts from the scaled linear mode plus, when ``restart`` is set, a
    seeded random field, keeping the better minimum.
    """
    mu = float(mu)
    if mu <= 0.0:
        raise ParameterError("mu must be positive")
    th0 = theta0_gate(seed=seed)
    if mu >= th0:
        raise ParameterError(
            f"mu = {mu} is not below the half-plane constant {th0:.6f}; "
            "the wedge energy is unbounded there")
    if operator is None:
        operator = sector_operator(alpha, radius, step)
    grid, links, K, q, ghosts = operator
    if ground is None:
        ground = smallest_eigenpair(K, q, tol=tol, seed=seed)
    lam, phi = ground
    coeffs = (-mu, 0.5 * mu)
    if mu <= lam and w0 is None:
        # at or below the linear threshold the zero field is the minimizer
        return _zero_solution(mu, alpha, grid, links, ghosts, lam, radius, step)

    kin_phi = np.vdot(phi, K @ phi).real
    m2_phi = float(np.sum(q * np.abs(phi) ** 2))
    m4_phi = float(np.sum(q * np.abs(phi) ** 4))
    tstar2, ray_energy = linear_mode_trial(kin_phi, m2_phi, m4_phi, mu)
    starts = []
    if w0 is not None:
        starts.append(("warm", np.asarray(w0, dtype=complex)))
    else:
        starts.append(("linear-mode", math.sqrt(max(tstar2, 0.0)) * phi))
        if restart:
            rng = np.random.default_rng(seed + 1)
            v = rng.standard_normal(grid.n_nodes) \
                + 1j * rng.standard_normal(grid.n_nodes)
            m2v = float(np.sum(q * np.abs(v) ** 2))
            scale = math.sqrt(max(tstar2, 1e-2) / m2v)
            starts.append(("random", scale * v))
    results = []
    for name, start in starts:
        res = minimize_quartic_energy(K, q, *coeffs, start, tol=tol,
                                      maxiter=maxiter)
        results.append((name, res))
    best_name, best = min(results, key=lambda nr: nr[1].energy)
    gap = max(r.energy for _, r in results) - best.energy
    w = best.field
    br = energy(grid, w, links, coeffs, ghosts=ghosts)
    fit = decay_rate(w, grid, radius)
    return SectorSolution(mu=mu, alpha=alpha, energy=br.total, field=w,
                          grid=grid, links=links, ghosts=ghosts, breakdown=br,
                          grad_norm=best.grad_norm, iterations=best.iterations,
                          decay=fit, radius=radius, step=step, threshold=lam,
                          restart_gap=float(gap))


def feynman_hellmann(solution):
    """Envelope slope of the energy in mu: -mass2 + mass4 / 2."""
    br = solution.breakdown
    return -br.mass2 + 0.5 * br.mass4


@dataclass
class MuSweep:
    alpha: float
    mu_grid: np.ndarray
    energies: np.ndarray
    fh_slopes: np.ndarray
    left_quotients: np.ndarray    # 3-point one-sided, NaN near the ends
    right_quotients: np.ndarray
    quotient_errors: np.ndarray   # |3-point - 2-point| per side, summed
    solutions: list
    threshold: float              # discrete wedge eigenvalue at this resolution
    radius: float
    step: float
    warm: bool

    def solution_at(self, mu):
        i = int(np.argmin(np.abs(self.mu_grid - mu)))
        if abs(self.mu_grid[i] - mu) > 1e-9 * max(1.0, abs(mu)):
            raise ParameterError(f"mu = {mu} is not a sweep grid point")
        return self.solutions[i]


def default_mu_grid(alpha, radius=DEFAULT_RADIUS, step=DEFAULT_STEP,
                    spacing=0.01, tol=1e-8, seed=0):
    """Grid from just below the corner threshold to just below theta0."""
    _, _, K, q, _ = sector_operator(alpha, radius, step)
    lam, _ = smallest_eigenpair(K, q, tol=tol, seed=seed)
    th0 = theta0_gate(seed=seed)
    start = max(spacing, lam - 0.05)
    stop = th0 - 0.01
    n = int(math.floor((stop - start) / spacing + 1e-9)) + 1
    return start + spacing * np.arange(n)


def mu_sweep(alpha, mu_grid=None, radius=DEFAULT_RADIUS, step=DEFAULT_STEP,
             tol=1e-8, seed=0, warm=True, maxiter=40000):
    """Solve along an increasing mu grid, warm-starting from neighbors.

    With warm starts disabled the members are independent (and run in
    parallel when the thread count allows); warm sweeps are sequential
    by definition.
    """
    if mu_grid is None:
        mu_grid = default_mu_grid(alpha, radius, step, tol=tol, seed=seed)
    mu_grid = np.asarray(mu_grid, dtype=float)
    if mu_grid.ndim != 1 or len(mu_grid) < 2:
        raise ParameterError("mu grid needs at least 2 increasing values")
    if np.any(np.diff(mu_grid) <= 0):
        raise ParameterError("mu grid must be increasing")
    th0 = theta0_gate(seed=seed)
    if mu_grid[0] <= 0 or mu_grid[-1] >= th0:
        raise ParameterError("mu grid must lie inside (0, theta0)")
    op = sector_operator(alpha, radius, step)
    ground = smallest_eigenpair(op[2], op[3], tol=tol, seed=seed)
    failures = []
    solutions = [None] * len(mu_grid)

    def solve_at(i, w0):
        try:
            return minimize_sector(mu_grid[i], alpha, radius, step, tol=tol,
                                   seed=seed, maxiter=maxiter, restart=False,
                                   w0=w0, operator=op, ground=ground)
        except SolverError as exc:
            failures.append((float(mu_grid[i]), str(exc)))
            return None

    if warm:
        prev = None
        for i in range(len(mu_grid)):
            w0 = None
            if prev is not None and not prev.trivial:
                w0 = prev.field
            sol = solve_at(i, w0)
            solutions[i] = sol
            prev = sol if sol is not None else prev
    else:
        solutions = _map(lambda i: solve_at(i, None), range(len(mu_grid)))
    if failures:
        raise SolverError("sweep members failed at mu = "
                          + ", ".join(f"{m:.4f}" for m, _ in failures))
    energies = np.array([s.energy for s in solutions])
    fh = np.array([feynman_hellmann(s) for s in solutions])
    left, right, qerr = _one_sided_tables(mu_grid, energies)
    return MuSweep(alpha=alpha, mu_grid=mu_grid, energies=energies,
                   fh_slopes=fh, left_quotients=left, right_quotients=right,
                   quotient_errors=qerr, solutions=solutions,
                   threshold=solutions[0].threshold, radius=radius, step=step,
                   warm=warm)


def _one_sided_tables(mu, E):
    n = len(mu)
    left = np.full(n, np.nan)
    right = np.full(n, np.nan)
    qerr = np.full(n, np.nan)
    d = np.diff(mu)
    uniform = np.allclose(d, d[0], rtol=1e-9, atol=0.0)
    for i in range(n):
        li = ri = np.nan
        el = er = np.nan
        if uniform and i >= 2:
            hgrid = d[0]
            li = (3 * E[i] - 4 * E[i - 1] + E[i - 2]) / (2 * hgrid)
            el = abs(li - (E[i] - E[i - 1]) / hgrid)
        elif i >= 1:
            li = (E[i] - E[i - 1]) / d[i - 1]
            el = np.nan
        if uniform and i <= n - 3:
            hgrid = d[0]
            ri = (-3 * E[i] + 4 * E[i + 1] - E[i + 2]) / (2 * hgrid)
            er = abs(ri - (E[i + 1] - E[i]) / hgrid)
        elif i <= n - 2:
            ri = (E[i + 1] - E[i]) / d[i]
            er = np.nan
        left[i] = li
        right[i] = ri
        qerr[i] = np.nansum([el, er]) if not (np.isnan(el) and np.isnan(er)) \
            else np.nan
    return left, right, qerr


def one_sided_derivatives(sweep, mu):
    """Left and right slope estimates of the energy curve at a grid point.

    Uses second-order one-sided quotients (exact for locally quadratic
    data); the returned record carries both slopes, their gap, and the
    quotient-error estimate |3-point - 2-point| that calibrates kink
    detection.
    """
    i = int(np.argmin(np.abs(sweep.mu_grid - mu)))
    if abs(sweep.mu_grid[i] - mu) > 1e-9 * max(1.0, abs(mu)):
        raise ParameterError(f"mu = {mu} is not a sweep grid point")
    if i < 2 or i > len(sweep.mu_grid) - 3:
        raise ParameterError("mu too close to the grid edge for one-sided "
                             "second-order quotients")
    left = float(sweep.left_quotients[i])
    right = float(sweep.right_quotients[i])
    return {"mu": float(sweep.mu_grid[i]), "left": left, "right": right,
            "gap": abs(right - left),
            "quotient_error": float(sweep.quotient_errors[i])}


def kink_scan(sweep, threshold):
    """Grid points whose one-sided slopes disagree beyond the threshold.

    Returns a (possibly empty) list of {mu, gap, quotient_error}
    records; these are candidates for the countable slope-mismatch set,
    reported with their uncertainty and without any ground-truth claim.
    A gap no larger than twice the local quotient error is attributed
    to the difference stencil, not to a kink.
    """
    out = []
    n = len(sweep.mu_grid)
    for i in range(2, n - 2):
        left = sweep.left_quotients[i]
        right = sweep.right_quotients[i]
        if np.isnan(left) or np.isnan(right):
            continue
        gap = abs(right - left)
        if gap > threshold and gap > 2.0 * sweep.quotient_errors[i]:
            out.append({"mu": float(sweep.mu_grid[i]), "gap": float(gap),
                        "quotient_error": float(sweep.quotient_errors[i])})
    return out
