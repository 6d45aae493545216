"""Nonlinear conjugate gradient descent for quartic energy functionals.

Minimizes E(w) = <w, K w> + c2 sum q|w|^2 + c4 sum q|w|^4 over complex
nodal fields.  Along any direction the energy is an exact quartic in the
step, so each iteration solves the cubic stationarity condition in
closed form and takes the best real root: no backtracking, one operator
application per iteration (the line update reuses K d).

Directions follow Polak-Ribiere with nonnegative restart; a direction
that fails the descent test falls back to steepest descent.  The run is
deterministic for a given start iterate.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError


@dataclass
class DescentResult:
    field: np.ndarray
    energy: float
    grad_norm: float
    iterations: int
    converged: bool


def _energy(Kw, w, q, c2, c4):
    p = np.abs(w) ** 2
    return (np.vdot(w, Kw).real + c2 * np.sum(q * p)
            + c4 * np.sum(q * p * p))


def _best_step(coeffs):
    """Argmin over t of c1 t + c2 t^2 + c3 t^3 + c4 t^4 (c4 > 0)."""
    c1, c2, c3, c4 = coeffs
    roots = np.roots([4.0 * c4, 3.0 * c3, 2.0 * c2, c1])
    real = roots[np.abs(roots.imag) <= 1e-10 * (1.0 + np.abs(roots.real))].real
    if real.size == 0:
        return 0.0
    vals = c1 * real + c2 * real ** 2 + c3 * real ** 3 + c4 * real ** 4
    return float(real[np.argmin(vals)])


def minimize_quartic_energy(K, q, c2, c4, w0, tol=1e-8, maxiter=20000):
    """Descend from w0 until ||g|| <= tol * max(1, L2 norm of the field).

    The gradient g satisfies E(w + t v) = E(w) + 2 t Re<g, v> + O(t^2).
    Raises ConvergenceError carrying the best iterate when the iteration
    cap is reached first.
    """
    q = np.asarray(q, dtype=float)
    w = np.asarray(w0, dtype=complex).copy()
    Kw = K @ w

    def grad(w, Kw):
        return Kw + c2 * q * w + 2.0 * c4 * q * np.abs(w) ** 2 * w

    def gnorm_limit(w):
        return tol * max(1.0, np.sqrt(np.sum(q * np.abs(w) ** 2)))

    g = grad(w, Kw)
    ng = np.linalg.norm(g)
    if ng <= gnorm_limit(w):
        return DescentResult(field=w, energy=_energy(Kw, w, q, c2, c4),
                            grad_norm=float(ng), iterations=0, converged=True)
    d = -g
    Kd = K @ d
    for it in range(1, maxiter + 1):
        p = np.abs(w) ** 2
        s = (w.conj() * d).real
        r = np.abs(d) ** 2
        qs = q * s
        a1 = 2.0 * np.vdot(d, Kw).real + 2.0 * c2 * np.sum(qs) \
            + 4.0 * c4 * np.sum(qs * p)
        a2 = np.vdot(d, Kd).real + c2 * np.sum(q * r) \
            + c4 * np.sum(q * (2.0 * p * r + 4.0 * s * s))
        a3 = 4.0 * c4 * np.sum(qs * r)
        a4 = c4 * np.sum(q * r * r)
        t = _best_step((a1, a2, a3, a4)) if a4 > 0.0 else 0.0
        if t == 0.0:
            # degenerate direction; retry from steepest descent
            d = -g
            Kd = K @ d
            continue
        w = w + t * d
        if it % 64 == 0:
            Kw = K @ w        # refresh the tracked product against drift
        else:
            Kw = Kw + t * Kd
        gn = grad(w, Kw)
        ngn = np.linalg.norm(gn)
        if ngn <= gnorm_limit(w):
            return DescentResult(field=w, energy=_energy(Kw, w, q, c2, c4),
                                 grad_norm=float(ngn), iterations=it,
                                 converged=True)
        beta = max(0.0, np.vdot(gn, gn - g).real / (ng * ng))
        d = -gn + beta * d
        if np.vdot(d, gn).real >= 0.0:
            d = -gn
        g, ng = gn, ngn
        Kd = K @ d
    best = DescentResult(field=w, energy=_energy(K @ w, w, q, c2, c4),
                         grad_norm=float(ng), iterations=maxiter,
                         converged=False)
    raise ConvergenceError(
        f"gradient norm {ng:.2e} after {maxiter} iterations",
        best=best, residual=float(ng), iterations=maxiter)
