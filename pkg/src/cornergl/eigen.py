"""Smallest eigenpair of the kinetic pencil (K, diag(q)).

Shift-invert Lanczos on the symmetrically scaled operator: with
S = diag(1/sqrt(q)) the pencil becomes the Hermitian standard problem
S K S, whose spectrum is the physical one, and a fixed negative shift
keeps the factorized matrix positive definite.  The start vector is
drawn from a seeded generator and the returned eigenvector's phase is
pinned, so repeated runs are bit-reproducible.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError

_SHIFT = -0.1


def smallest_eigenpair(K, q, tol=1e-8, seed=0, maxiter=None):
    """Ground pair (lam, phi) of K phi = lam q phi.

    ``phi`` is q-normalized (sum q |phi|^2 = 1) with a deterministic
    global phase.  The residual contract ||K phi - lam q phi|| <=
    tol * ||phi|| is verified; violation raises SolverError carrying the
    best iterate.
    """
    n = K.shape[0]
    q = np.asarray(q, dtype=float)
    s = 1.0 / np.sqrt(q)
    S = sp.diags(s)
    Ks = (S @ K @ S).tocsc()
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    lam = phi = None
    err = None
    for ncv in (None, 60):
        try:
            vals, vecs = spla.eigsh(Ks, k=1, sigma=_SHIFT, which="LM",
                                    v0=v0, tol=min(tol * 1e-2, 1e-10),
                                    maxiter=maxiter, ncv=ncv)
            lam = float(vals[0])
            phi = s * vecs[:, 0]
            break
        except spla.ArpackError as exc:   # pragma: no cover - rare retry path
            err = exc
    if phi is None:                        # pragma: no cover
        raise SolverError(f"eigensolver failed to converge: {err}")
    norm = np.sqrt(np.sum(q * np.abs(phi) ** 2))
    phi = phi / norm
    # deterministic phase: largest-magnitude entry made real positive
    i = int(np.argmax(np.abs(phi)))
    phase = phi[i] / abs(phi[i])
    phi = phi / phase
    resid = np.linalg.norm(K @ phi - lam * q * phi) / np.linalg.norm(phi)
    if resid > tol:
        raise SolverError(
            f"eigenresidual {resid:.2e} exceeds tolerance {tol:.2e}",
            best=(lam, phi), residual=resid)
    return lam, phi


def rayleigh_quotient(K, q, w):
    """<w, K w> / sum(q |w|^2)."""
    w = np.asarray(w, dtype=complex)
    num = np.vdot(w, K @ w).real
    den = np.sum(np.asarray(q, dtype=float) * np.abs(w) ** 2)
    return num / den
