"""Ground eigenvalues of the magnetic kinetic form: corner thresholds,
the half-plane constant, and the derived critical-field table.

Two realizations are used.  Corner thresholds mu1(alpha) come from the
truncated wedge with natural boundary conditions on the straight edges
and a Dirichlet penalty on the artificial truncation arc; leaving the
arc free would let the fictitious wedge corners of the truncation bind
states below the half-plane constant and corrupt every opening angle
past pi/2.

The half-plane constant itself is realized on a periodic channel: x is
periodic, y runs from the free (Neumann) edge at 0 to a Dirichlet wall
at depth W, with the linear-in-y gauge.  The ground eigenvalue is then
minimized over the gauge offset, which slides the discrete momentum
ladder through the optimal surface-state center; truncation error decays
like a Gaussian in W, so moderate depths are already converged far below
the discretization error.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize_scalar

from .eigen import rayleigh_quotient, smallest_eigenpair
from .errors import GeometryError
from .gauge import build_links
from .grid import MaskedGrid, sector_grid, sector_truncation_ghosts
from .geometry import make_sector
from .operators import assemble_kinetic_form, richardson

DEFAULT_RADIUS = 14.0
DEFAULT_STEP = 0.07
STRIP_PERIOD = 6.0


def thread_count():
    try:
        return max(1, int(os.environ.get("CORNERGL_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    workers = thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class SpectralResult:
    alpha: float
    eigenvalue: float             # extrapolated when possible, else finest
    eigenfunction: np.ndarray     # finest-resolution ground state, q-normalized
    grid: object                  # MaskedGrid carrying the eigenfunction
    resolutions: list             # [(h, R, raw eigenvalue), ...]
    extrapolated: float
    uncertainty: float
    truncation_change: float = 0.0
    truncation_flagged: bool = False
    offset: float = None          # channel realizations: optimal gauge offset


def sector_operator(alpha, radius, step):
    """(grid, links, K, q) for the truncated wedge eigenproblem."""
    geom = make_sector(alpha, radius, step)
    grid = sector_grid(geom)
    links = build_links(grid, field_scale=1.0)
    ghosts = sector_truncation_ghosts(grid, geom)
    K = assemble_kinetic_form(grid, links, ghosts=ghosts)
    return grid, links, K, grid.quad_weights(), ghosts


def _sector_ground(alpha, radius, step, tol, seed):
    grid, _, K, q, _ = sector_operator(alpha, radius, step)
    lam, phi = smallest_eigenpair(K, q, tol=tol, seed=seed)
    return lam, phi, grid


def _aligned_order(alpha):
    """Extrapolation order: 2 when both wedge edges are lattice lines."""
    for exact in (0.5 * math.pi, math.pi, 1.5 * math.pi):
        if abs(alpha - exact) < 1e-12:
            return 2
    return 1


def mu1(alpha, schedule=None, tol=1e-8, seed=0):
    """Corner threshold: ground eigenvalue of the wedge of opening alpha.

    ``schedule`` is a list of (radius, step) pairs, coarse to fine; the
    two finest at the largest radius feed a step-halving extrapolation.
    An extra solve at radius + 2 measures truncation sensitivity; a
    change above 10 * tol flags the result.
    """
    if schedule is None:
        schedule = [(DEFAULT_RADIUS, DEFAULT_STEP),
                    (DEFAULT_RADIUS, DEFAULT_STEP / 2)]
    if len(schedule) < 2:
        raise ValueError("schedule needs at least 2 resolutions")
    solves = _map(lambda rs: _sector_ground(alpha, rs[0], rs[1], tol, seed),
                  list(schedule))
    resolutions = [(h, R, lam) for (R, h), (lam, _, _) in zip(schedule, solves)]
    lam_fine, phi, grid = solves[-1]
    R_last, h_last = schedule[-1]
    prev = [(R, h, lam) for (R, h), (lam, _, _) in zip(schedule[:-1], solves[:-1])
            if R == R_last and abs(h - 2 * h_last) < 1e-12]
    order = _aligned_order(alpha)
    if prev:
        extrap, spread = richardson(prev[-1][2], lam_fine, order=order)
    else:
        extrap, spread = lam_fine, abs(lam_fine - solves[-2][0])
    R_coarse, h_coarse = schedule[0]
    lam_R, _, _ = _sector_ground(alpha, R_coarse + 2.0, h_coarse, tol, seed)
    change = abs(lam_R - solves[0][0])
    return SpectralResult(alpha=alpha, eigenvalue=lam_fine,
                          eigenfunction=phi,
                          grid=grid, resolutions=resolutions,
                          extrapolated=extrap, uncertainty=spread,
                          truncation_change=change,
                          truncation_flagged=bool(change > 10 * tol))


def _strip_operator(depth, step, offset, dirichlet_edge=False,
                    period=STRIP_PERIOD):
    """Periodic-channel kinetic operator with gauge A = (offset - y, 0)."""
    h = step
    nx = int(round(period / h))
    ny = int(round(depth / h))
    ys = (np.arange(ny) + 0.5) * h
    n = nx * ny
    idx = np.arange(n).reshape(nx, ny)
    ymid = np.broadcast_to(ys, (nx, ny))
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    # x-edges with periodic wrap
    ia = idx.ravel()
    ib = idx[(np.arange(nx) + 1) % nx, :].ravel()
    ph = np.exp(-1j * (offset - ymid.ravel()) * h)
    rows += [ia, ib]
    cols += [ib, ia]
    vals += [-ph, -np.conj(ph)]
    np.add.at(diag, ia, 1.0)
    np.add.at(diag, ib, 1.0)
    # y-edges, zero phase
    ia = idx[:, :-1].ravel()
    ib = idx[:, 1:].ravel()
    one = np.ones(ia.size)
    rows += [ia, ib]
    cols += [ib, ia]
    vals += [-one + 0j, -one + 0j]
    np.add.at(diag, ia, 1.0)
    np.add.at(diag, ib, 1.0)
    # Dirichlet wall at the far side; optionally also at the edge itself
    diag[idx[:, -1]] += 1.0
    if dirichlet_edge:
        diag[idx[:, 0]] += 1.0
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag.astype(complex))
    # the unit-coefficient graph form already carries the h^2 edge
    # quadrature against the 1/h^2 difference quotients, so it pairs
    # with the h^2 mass weights as the physical kinetic form
    K = sp.csr_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    q = np.full(n, h * h)
    return K, q, (nx, ny)


def _strip_ground(depth, step, tol, seed, dirichlet_edge=False, bracket=None):
    """Eigenvalue minimized over the gauge offset; returns (lam, c*, phi, dims)."""
    spacing = 2.0 * math.pi / STRIP_PERIOD

    def lam_of(c):
        K, q, _ = _strip_operator(depth, step, c, dirichlet_edge)
        val, _ = smallest_eigenpair(K, q, tol=tol, seed=seed)
        return val

    lo, hi = bracket if bracket is not None else (0.0, spacing)
    res = minimize_scalar(lam_of, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-6 * spacing})
    K, q, dims = _strip_operator(depth, step, res.x, dirichlet_edge)
    lam, phi = smallest_eigenpair(K, q, tol=tol, seed=seed)
    return lam, float(res.x), phi, dims


_THETA0_CACHE = {}


def theta0(schedule=None, tol=1e-8, seed=0, dirichlet_edge=False):
    """Half-plane edge constant via the periodic channel realization.

    Same result shape as :func:`mu1` with alpha = pi.  Results are
    cached per (schedule, tol, variant); every consumer of the constant
    reads the same computed artifact.  ``dirichlet_edge=True`` clamps
    the physical edge as well, which by form-domain monotonicity must
    not lower the eigenvalue.
    """
    if schedule is None:
        schedule = [(DEFAULT_RADIUS, DEFAULT_STEP),
                    (DEFAULT_RADIUS, DEFAULT_STEP / 2)]
    key = (tuple(tuple(x) for x in schedule), tol, bool(dirichlet_edge), seed)
    if key in _THETA0_CACHE:
        return _THETA0_CACHE[key]
    results = []
    bracket = None
    for depth, h in schedule:
        lam, copt, phi, dims = _strip_ground(depth, h, tol, seed,
                                             dirichlet_edge, bracket)
        spacing = 2.0 * math.pi / STRIP_PERIOD
        bracket = (max(0.0, copt - 0.15 * spacing),
                   min(spacing, copt + 0.15 * spacing))
        results.append((h, depth, lam, copt, phi, dims))
    resolutions = [(h, depth, lam) for h, depth, lam, _, _, _ in results]
    h_f, W_f, lam_f, c_f, phi_f, dims_f = results[-1]
    pair = [r for r in results[:-1]
            if r[1] == W_f and abs(r[0] - 2 * h_f) < 1e-12]
    if pair:
        extrap, spread = richardson(pair[-1][2], lam_f, order=2)
    else:
        extrap, spread = lam_f, abs(lam_f - results[-2][2])
    W0, h0 = schedule[0][0], schedule[0][1]
    lam_W, _, _, _ = _strip_ground(W0 + 2.0, h0, tol, seed, dirichlet_edge,
                                   bracket)
    change = abs(lam_W - results[0][2])
    nx_f, ny_f = dims_f
    grid = MaskedGrid(origin=np.array([0.5 * h_f, 0.5 * h_f]), step=h_f,
                      dims=(nx_f, ny_f), mask=np.ones((nx_f, ny_f), bool),
                      weights=np.ones(nx_f * ny_f),
                      index=np.arange(nx_f * ny_f).reshape(nx_f, ny_f))
    norm = math.sqrt(float(np.sum(grid.quad_weights() * np.abs(phi_f) ** 2)))
    out = SpectralResult(alpha=math.pi, eigenvalue=lam_f,
                         eigenfunction=phi_f / norm, grid=grid,
                         resolutions=resolutions, extrapolated=extrap,
                         uncertainty=spread, truncation_change=change,
                         truncation_flagged=bool(change > 10 * tol),
                         offset=c_f)
    _THETA0_CACHE[key] = out
    return out


def theta0_value(tol=1e-8, seed=0):
    """Cached scalar half-plane constant at the default schedule."""
    return theta0(tol=tol, seed=seed).extrapolated


GATE_SCHEDULE = ((8.0, 0.1), (8.0, 0.05))


def theta0_gate(seed=0):
    """Cheap cached half-plane constant for domain-of-definition gates.

    Accurate to a few parts in 1e-3, which is all a parameter check
    needs; anything that reports the constant itself goes through the
    default schedule instead.
    """
    return theta0(schedule=list(GATE_SCHEDULE), tol=1e-7,
                  seed=seed).extrapolated


@dataclass
class VertexCheck:
    vertex: int
    alpha: float
    mu1: float
    margin: float                 # theta0 - mu1(alpha)
    uncertainty: float            # combined extrapolation spreads
    state: str                    # "holds" | "fails" | "inconclusive"


@dataclass
class AssumptionCheck:
    vertices: list                # [VertexCheck]
    theta0: float
    holds: bool
    inconclusive: bool


def check_corner_assumption(domain, tol=1e-8, seed=0, schedule=None,
                            cache=None):
    """Per-vertex margins of the corner-threshold condition.

    A vertex passes when theta0 - mu1(alpha_k) is positive beyond the
    combined extrapolation uncertainty; margins inside the uncertainty
    band produce the explicit "inconclusive" state rather than a bool.
    """
    th = theta0(tol=tol, seed=seed)
    checks = []
    cache = cache if cache is not None else {}
    for k, alpha in enumerate(domain.angles):
        akey = round(float(alpha), 12)
        if akey not in cache:
            cache[akey] = mu1(alpha, schedule=schedule, tol=tol, seed=seed)
        res = cache[akey]
        margin = th.extrapolated - res.extrapolated
        unc = th.uncertainty + res.uncertainty \
            + th.truncation_change + res.truncation_change
        if margin > unc:
            state = "holds"
        elif margin < -unc:
            state = "fails"
        else:
            state = "inconclusive"
        checks.append(VertexCheck(vertex=k, alpha=float(alpha),
                                  mu1=res.extrapolated, margin=margin,
                                  uncertainty=unc, state=state))
    return AssumptionCheck(vertices=checks, theta0=th.extrapolated,
                           holds=all(c.state == "holds" for c in checks),
                           inconclusive=any(c.state == "inconclusive"
                                            for c in checks))


@dataclass
class CriticalFieldTable:
    kappa: float
    h_c2: float                   # bulk threshold kappa
    h_surface: float              # kappa / theta0
    rows: list                    # [(vertex, alpha, mu1, H)] sorted by mu1 desc
    lambda1: float                # min over vertices of mu1(alpha_k)
    theta0: float
    assumption: AssumptionCheck = dc_field(repr=False, default=None)
    warning: str = None

    def sigma_prime(self, mu):
        """Vertex indices whose corner threshold lies at or below mu."""
        return [v for v, _, m, _ in self.rows if m <= mu]


def critical_fields(domain, kappa, tol=1e-8, seed=0, schedule=None,
                    cache=None):
    """Ordered corner critical fields kappa / mu1(alpha_k).

    Rows are sorted so the thresholds mu1 decrease (field values
    increase); the table embeds the assumption margins, downgrading to a
    warning when any margin is inconclusive.
    """
    if kappa <= 0.0:
        raise GeometryError("kappa must be positive")
    check = check_corner_assumption(domain, tol=tol, seed=seed,
                                    schedule=schedule, cache=cache)
    rows = [(c.vertex, c.alpha, c.mu1, kappa / c.mu1)
            for c in sorted(check.vertices, key=lambda c: -c.mu1)]
    warning = None
    if not check.holds:
        warning = ("corner-threshold margins not conclusively positive; "
                   "field ordering may be unreliable")
    return CriticalFieldTable(kappa=float(kappa), h_c2=float(kappa),
                              h_surface=kappa / check.theta0, rows=rows,
                              lambda1=min(c.mu1 for c in check.vertices),
                              theta0=check.theta0, assumption=check,
                              warning=warning)
