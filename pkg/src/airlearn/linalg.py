"""Dense linear algebra used by the analytic classifiers.

Everything is float64. Symmetric matrices are plain ``(f, f)`` ndarrays whose
symmetry is maintained by only ever applying symmetric updates.
"""

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import _backend

__all__ = [
    "regularized_spd_solve",
    "rank1_sym_update",
    "rank1_sym_update_",
    "relative_frobenius_error",
]

_JITTER = 1e-8


def _check_finite(name, a):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")


def regularized_spd_solve(G, B, gamma):
    """Solve ``(G + gamma * I) W = B`` for W.

    G must be symmetric positive semidefinite and ``gamma > 0``, so the system
    matrix is SPD and a Cholesky factorization applies. If round-off breaks
    the factorization, a jitter of ``1e-8 * trace(G) / f`` is added to the
    diagonal and the factorization is retried. One step of iterative
    refinement follows the solve.

    Parameters
    ----------
    G : ndarray of shape (f, f)
    B : ndarray of shape (f, C) or (f,)
    gamma : float

    Returns
    -------
    W : ndarray with the shape of ``B``
    """
    G = np.asarray(G, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"G must be square, got shape {G.shape}")
    if B.ndim not in (1, 2) or B.shape[0] != G.shape[0]:
        raise ValueError(f"B has shape {B.shape}, incompatible with G of shape {G.shape}")
    _check_finite("G", G)
    _check_finite("B", B)

    f = G.shape[0]
    M = G + gamma * np.eye(f)
    try:
        factor = cho_factor(M, lower=True, check_finite=False)
    except LinAlgError:
        M = M + _JITTER * (np.trace(G) / f) * np.eye(f)
        try:
            factor = cho_factor(M, lower=True, check_finite=False)
        except LinAlgError:
            raise ValueError("G + gamma*I is not positive definite; G is not positive semidefinite") from None
    W = cho_solve(factor, B, check_finite=False)
    W += cho_solve(factor, B - M @ W, check_finite=False)
    return W


def rank1_sym_update(G, x, scale=1.0):
    """Return ``G + scale * outer(x, x)`` without modifying G."""
    out = np.array(G, dtype=np.float64, order="C", copy=True)
    rank1_sym_update_(out, x, scale)
    return out


def rank1_sym_update_(G, x, scale=1.0):
    """In-place form of :func:`rank1_sym_update`. G must be C-contiguous float64."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or G.shape != (x.shape[0], x.shape[0]):
        raise ValueError(f"vector of shape {x.shape} does not match matrix of shape {G.shape}")
    _check_finite("x", x)
    _backend.sym_rank1_update(G, x, float(scale))
    return G


def relative_frobenius_error(a, b):
    """``||a - b||_F / max(||b||_F, tiny)``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / max(denom, np.finfo(np.float64).tiny))
