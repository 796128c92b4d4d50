"""Shared dense linear algebra helpers: tolerant ranks, null spaces,
pseudo-inverses and the package RNG convention.

Numerical rank uses a relative singular-value threshold ``tol * sigma_max``
with default ``tol = 1e-10`` (override globally through the environment
variable ``BTD_RANK_TOL`` or per call).  All random draws in the package go
through :func:`rng`, a PCG64 generator seeded explicitly, so every stochastic
operation is reproducible from its seed.
"""

import os

import numpy as np

DEFAULT_RANK_TOL = 1e-10


class DimensionError(ValueError):
    """Arguments with inconsistent or unsupported dimensions."""


class SolverDiagnostic(RuntimeError):
    """A solver step detected that its working assumptions do not hold.

    Carries a ``diagnostics`` dict naming the failed condition(s).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


def default_tol():
    env = os.environ.get("BTD_RANK_TOL")
    if env:
        return float(env)
    return DEFAULT_RANK_TOL


def rng(seed):
    """Deterministic generator (PCG64) for the given integer seed."""
    return np.random.Generator(np.random.PCG64(seed))


def randn(gen, shape, field="real"):
    """Standard normal array; circularly-symmetric complex normal if complex."""
    if field == "complex":
        return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)
    return gen.standard_normal(shape)


def numerical_rank(a, tol=None):
    a = np.asarray(a)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    tol = default_tol() if tol is None else tol
    return int(np.sum(s > tol * s[0]))


def null_space(a, tol=None, dim=None):
    """Orthonormal basis of the (numerical) null space, columns of shape (n, q).

    With ``dim`` given, returns the ``dim`` right singular vectors of the
    smallest singular values regardless of threshold (the noisy-pipeline
    convention).
    """
    a = np.asarray(a)
    m, n = a.shape
    if m == 0:
        q = n if dim is None else dim
        return np.eye(n)[:, :q]
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    if dim is None:
        tol = default_tol() if tol is None else tol
        smax = s[0] if s.size else 0.0
        r = int(np.sum(s > tol * smax)) if smax > 0 else 0
    else:
        r = n - dim
    return vh[r:].conj().T


def pinv(a, tol=None):
    tol = default_tol() if tol is None else tol
    return np.linalg.pinv(a, rcond=tol)


def lstsq(a, b, tol=None):
    tol = default_tol() if tol is None else tol
    x, *_ = np.linalg.lstsq(a, b, rcond=tol)
    return x


def cond(a):
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    if s.size == 0 or s[-1] == 0:
        return np.inf
    return float(s[0] / s[-1])


def truncated_svd(a, r):
    """Best rank-r approximation factors (b, c) with a ~= b @ c.T."""
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    r = min(r, s.size)
    b = u[:, :r] * s[:r]
    c = vh[:r].T
    return b, c


def orth(a, tol=None, dim=None):
    """Orthonormal basis of the column space."""
    a = np.asarray(a)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if dim is None:
        tol = default_tol() if tol is None else tol
        r = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    else:
        r = dim
    return u[:, :r]


def principal_angles(u, v):
    """Principal angles (radians) between the column spaces of u and v."""
    qu = orth(u, dim=min(u.shape))
    qv = orth(v, dim=min(v.shape))
    s = np.linalg.svd(qu.conj().T @ qv, compute_uv=False)
    s = np.clip(s, -1.0, 1.0)
    return np.arccos(s)


def subspace_distance(u, v):
    """Largest principal angle; 0 when the spans coincide."""
    if u.shape[1] != v.shape[1]:
        return np.pi / 2
    ang = principal_angles(u, v)
    return float(ang.max()) if ang.size else 0.0


def dominant_rank1(m):
    """Best rank-1 factors (w, z) with m ~= outer(w, z) and ||z|| = 1."""
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    w = u[:, 0] * s[0]
    # vh rows are conjugated right singular vectors, exactly the row factor
    z = vh[0]
    return w, z


def relative_error(est, truth):
    denom = np.linalg.norm(truth)
    if denom == 0:
        return float(np.linalg.norm(est))
    return float(np.linalg.norm(est - truth) / denom)
