"""Symmetric joint block diagonalization by eigendecomposition.

Given symmetric K x K matrices V_1, ..., V_Q admitting a joint factorization
V_q = N D_q N.T with block-diagonal symmetric D_q (block sizes d_1..d_R),
the block column spaces of N are recovered from the commutant subspace
{U : U V_q = V_q U.T for all q}: a basis U_1..U_R of that subspace is
simultaneously diagonalizable by N, so N and the block sizes follow from an
eigendecomposition.  Two variants are provided for the simultaneous EVD
step: the EVD of a single generic linear combination, and a least-squares
rank-one tensor refinement of it that is more robust under noise.

Transposes here are plain transposes even over the complex field; none of
the factors are required to be orthogonal.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import (
    DimensionError,
    SolverDiagnostic,
    default_tol,
    lstsq,
    null_space,
    numerical_rank,
    orth,
    randn,
    rng,
)

__all__ = [
    "SJBDProblem",
    "SJBDSolution",
    "build_commutant_matrix",
    "commutant_basis",
    "simultaneous_evd_single",
    "simultaneous_evd_cpd",
    "solve_sjbd",
    "cluster_columns",
    "cpd_als",
]

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SJBDProblem:
    """A set of symmetric matrices to block-diagonalize jointly.

    In exact mode the inputs must be symmetric to 1e-12 relative; in
    approximate mode they are symmetrized on ingestion.
    """

    V: tuple
    mode: str = "exact"
    hint_R: int = None
    hint_sum_d: int = None

    def __post_init__(self):
        if self.mode not in ("exact", "approximate"):
            raise ValueError(f"unknown mode {self.mode!r}")
        mats = []
        for q, v in enumerate(self.V):
            v = np.asarray(v)
            if v.ndim != 2 or v.shape[0] != v.shape[1]:
                raise DimensionError(f"V[{q}] is not square")
            dev = np.linalg.norm(v - v.T)
            if self.mode == "exact":
                if dev > SYMMETRY_TOL * max(np.linalg.norm(v), 1.0):
                    raise ValueError(f"V[{q}] is not symmetric (deviation {dev:.2e})")
            v = (v + v.T) / 2.0
            mats.append(v)
        if len({m.shape for m in mats}) > 1:
            raise DimensionError("all V_q must share the same size")
        object.__setattr__(self, "V", tuple(mats))

    @property
    def K(self):
        return self.V[0].shape[0]

    @property
    def Q(self):
        return len(self.V)


@dataclass(frozen=True)
class SJBDSolution:
    """Joint block diagonalizer N = [N_1 ... N_R], block sizes, coefficients."""

    N: np.ndarray
    d: tuple
    D: tuple
    status: str = "ok"
    diagnostics: dict = field(default_factory=dict)

    @property
    def R(self):
        return len(self.d)

    def blocks(self):
        offs = np.concatenate([[0], np.cumsum(self.d)])
        return [self.N[:, offs[r] : offs[r + 1]] for r in range(self.R)]

    def reconstruction_errors(self, v_list):
        errs = []
        for v, d_q in zip(v_list, self.D):
            recon = self.N @ d_q @ self.N.T
            errs.append(np.linalg.norm(recon - v) / max(np.linalg.norm(v), 1e-300))
        return np.array(errs)


def commutation_matrix(k):
    """K^2 x K^2 permutation with P vec(U) = vec(U.T) (column-major vec)."""
    p = np.zeros((k * k, k * k))
    for r in range(k):
        for c in range(k):
            p[r * k + c, c * k + r] = 1.0
    return p


def build_commutant_matrix(problem):
    """Stacked K^2 Q x K^2 matrix whose null space is
    {vec(U) : U V_q = V_q U.T for all q}."""
    v_list = problem.V if isinstance(problem, SJBDProblem) else [np.asarray(v) for v in problem]
    k = v_list[0].shape[0]
    eye = np.eye(k)
    p = commutation_matrix(k)
    blocks = [np.kron(v.T, eye) - np.kron(eye, v) @ p for v in v_list]
    return np.vstack(blocks)


def commutant_basis(problem, r_target=None, tol=None):
    """Basis U_1..U_R of the commutant subspace of the V_q.

    Exact mode detects R as the null-space dimension of the stacked
    commutant matrix; approximate mode takes the ``r_target`` smallest right
    singular directions instead (in noisy data the exact null space is only
    the span of the vectorized identity).  Assumes the slices span, i.e.
    K = sum d_r; :func:`solve_sjbd` compresses first when they do not.
    """
    if not isinstance(problem, SJBDProblem):
        problem = SJBDProblem(tuple(problem), mode="exact")
    m = build_commutant_matrix(problem)
    k = problem.K
    if problem.mode == "approximate" or r_target is not None:
        if r_target is None:
            raise DimensionError("approximate mode needs r_target")
        basis = null_space(m, dim=r_target)
    else:
        basis = null_space(m, tol=tol)
    mats = [basis[:, i].reshape(k, k, order="F") for i in range(basis.shape[1])]
    return len(mats), mats


def _cluster_scalars(values, tol, n_clusters=None):
    """Group near-equal scalars; single-linkage merging in the complex plane.

    With ``n_clusters`` given, merges closest clusters until that many
    remain; otherwise merges while the gap is below ``tol`` relative to the
    value scale.
    """
    values = np.asarray(values)
    n = values.size
    labels = list(range(n))
    scale = max(np.max(np.abs(values)), 1e-300)

    def _gap(ca, cb):
        va = values[[i for i in range(n) if labels[i] == ca]]
        vb = values[[i for i in range(n) if labels[i] == cb]]
        return min(abs(a - b) for a in va for b in vb)

    while True:
        uniq = sorted(set(labels))
        if len(uniq) <= 1:
            break
        best = None
        for ai in range(len(uniq)):
            for bi in range(ai + 1, len(uniq)):
                g = _gap(uniq[ai], uniq[bi])
                if best is None or g < best[0]:
                    best = (g, uniq[ai], uniq[bi])
        if n_clusters is not None:
            if len(uniq) <= n_clusters:
                break
        elif best[0] > tol * scale:
            break
        _, keep, drop = best
        labels = [keep if l == drop else l for l in labels]
    uniq = sorted(set(labels), key=lambda l: labels.index(l))
    remap = {l: i for i, l in enumerate(uniq)}
    return np.array([remap[l] for l in labels])


def cluster_columns(x, n_clusters=None, threshold=None):
    """Cluster columns modulo sign/scaling by absolute cosine similarity.

    Each column is normalized to unit norm with its largest-magnitude entry
    made real positive; clusters are merged greedily on the largest pairwise
    similarity until ``n_clusters`` remain (or until no pair exceeds
    ``threshold``).  Returns integer labels in order of first appearance.
    """
    x = np.asarray(x)
    n = x.shape[1]
    cols = np.array(x, dtype=np.result_type(x, np.float64))
    for j in range(n):
        nrm = np.linalg.norm(cols[:, j])
        if nrm > 0:
            cols[:, j] /= nrm
        pivot = np.argmax(np.abs(cols[:, j]))
        piv = cols[pivot, j]
        if np.abs(piv) > 0:
            cols[:, j] *= np.conj(piv) / np.abs(piv)
    sim = np.abs(cols.conj().T @ cols)
    labels = list(range(n))
    if threshold is None:
        threshold = 1.0 - 1e-6

    def _cluster_sim(ca, cb):
        ia = [i for i in range(n) if labels[i] == ca]
        ib = [i for i in range(n) if labels[i] == cb]
        return max(sim[a, b] for a in ia for b in ib)

    while True:
        uniq = sorted(set(labels))
        if len(uniq) <= 1:
            break
        best = None
        for ai in range(len(uniq)):
            for bi in range(ai + 1, len(uniq)):
                s = _cluster_sim(uniq[ai], uniq[bi])
                if best is None or s > best[0]:
                    best = (s, uniq[ai], uniq[bi])
        if n_clusters is not None:
            if len(uniq) <= n_clusters:
                break
        elif best[0] < threshold:
            break
        _, keep, drop = best
        labels = [keep if l == drop else l for l in labels]
    uniq = sorted(set(labels), key=lambda l: labels.index(l))
    remap = {l: i for i, l in enumerate(uniq)}
    return np.array([remap[l] for l in labels])


def _realify_blocks(blocks, means, tol):
    if any(abs(np.imag(m)) > tol * max(np.max(np.abs(means)), 1.0) for m in means):
        return blocks, False
    real_blocks = []
    for b in blocks:
        stacked = np.hstack([np.real(b), np.imag(b)])
        real_blocks.append(orth(stacked, dim=b.shape[1]))
    return real_blocks, True


def simultaneous_evd_single(u_mats, seed=0, cluster_tol=1e-6, n_clusters=None):
    """Joint diagonalizer from the EVD of one generic combination.

    Z = sum_r w_r U_r with generic seeded weights; its eigenvalue clusters
    give the block sizes d_r and the grouped eigenvectors give N.  Raises
    :class:`SolverDiagnostic` when Z is numerically defective.
    """
    if not u_mats:
        raise DimensionError("need at least one matrix")
    k = u_mats[0].shape[0]
    gen = rng(seed)
    complex_input = any(np.iscomplexobj(u) for u in u_mats)
    w = randn(gen, len(u_mats), "complex" if complex_input else "real")
    z = sum(wi * ui for wi, ui in zip(w, u_mats))
    vals, vecs = np.linalg.eig(z)
    if numerical_rank(vecs, tol=1e-10) < k:
        raise SolverDiagnostic(
            "combination matrix is defective; eigenvectors do not span",
            {"eigenvector_rank": numerical_rank(vecs, tol=1e-10), "size": k},
        )
    labels = _cluster_scalars(vals, cluster_tol, n_clusters=n_clusters)
    n_grp = labels.max() + 1
    blocks = []
    means = []
    for g in range(n_grp):
        idx = np.nonzero(labels == g)[0]
        blocks.append(vecs[:, idx])
        means.append(vals[idx].mean())
    if not complex_input:
        blocks, _ = _realify_blocks(blocks, means, cluster_tol)
    order = np.argsort([-b.shape[1] for b in blocks], kind="stable")
    blocks = [blocks[i] for i in order]
    n = np.hstack(blocks)
    d = tuple(b.shape[1] for b in blocks)
    return n, d


def _kr(x, y):
    # Khatri-Rao with the second factor's row index fastest
    return (x[:, None, :] * y[None, :, :]).reshape(-1, x.shape[1])


def cpd_als(tensor, rank, init, max_iter=500, rel_tol=1e-12):
    """Alternating least squares for a CPD of an m x n x n stack.

    Model: tensor[r, i, j] = sum_k A[r, k] C[i, k] B[j, k].  Returns the
    factors, the final relative fit, and a convergence flag.
    """
    m, n, _ = tensor.shape
    a, c, b = (np.array(f) for f in init)
    t0 = tensor.reshape(m, n * n)
    t1 = tensor.transpose(1, 0, 2).reshape(n, m * n)
    t2 = tensor.transpose(2, 0, 1).reshape(n, m * n)
    norm_t = np.linalg.norm(t0)
    prev_fit = np.inf
    converged = False
    for _ in range(max_iter):
        a = lstsq(_kr(c, b), t0.T).T
        c = lstsq(_kr(a, b), t1.T).T
        b = lstsq(_kr(a, c), t2.T).T
        # balance the scaling indeterminacy into the first factor
        for f in (b, c):
            nrm = np.linalg.norm(f, axis=0)
            nrm[nrm == 0] = 1.0
            f /= nrm[None, :]
            a *= nrm[None, :]
        fit = np.linalg.norm(t0 - a @ _kr(c, b).T) / max(norm_t, 1e-300)
        if abs(prev_fit - fit) <= rel_tol * max(fit, 1.0):
            converged = True
            break
        prev_fit = fit
    return (a, c, b), fit, converged


def simultaneous_evd_cpd(
    u_mats,
    omega=2.0,
    seed=0,
    n_clusters=None,
    cluster_tol=1e-6,
    max_iter=500,
    partition=True,
):
    """Joint diagonalizer via a rank-one tensor fit of the stacked basis.

    The basis matrices are stacked into a tensor whose exact decomposition
    is U_r = C diag(a_r1..a_rK) B.T with B = C^{-T}; the last slice is
    replaced by omega * I, which is always consistent and softly enforces
    that coupling.  The fit is an alternating least squares refinement
    initialized from the single-combination EVD.  The K first-factor columns
    are clustered modulo sign/scaling to find the block sizes and the
    permutation grouping the columns of N.

    Returns (N, d, perm, status, fit); with ``partition=False`` the columns
    are left ungrouped and d is None.
    """
    k = u_mats[0].shape[0]
    mats = [np.array(u) for u in u_mats]
    mats[-1] = omega * np.eye(k, dtype=mats[-1].dtype)
    stack = np.stack(mats)

    # the grouped single-combination EVD keeps the initialization real for
    # real input, so the refinement stays in real arithmetic
    n0, _ = simultaneous_evd_single(
        mats, seed=seed, cluster_tol=cluster_tol, n_clusters=n_clusters
    )
    if numerical_rank(n0, tol=1e-12) < k:
        # realified grouping can collapse when conjugate directions land in
        # different clusters; fall back to the ungrouped complex eigenbasis
        n0, _ = simultaneous_evd_single(mats, seed=seed, cluster_tol=0.0, n_clusters=k)
    try:
        n0_inv = np.linalg.inv(n0)
    except np.linalg.LinAlgError as exc:
        raise SolverDiagnostic(
            "initialization eigenbasis is singular", {"size": k}
        ) from exc
    a0 = np.stack([np.diagonal(n0_inv @ u @ n0) for u in mats])
    (a, c, _b), fit, converged = cpd_als(
        stack, k, (a0, n0, n0_inv.T), max_iter=max_iter
    )
    status = "ok" if converged else "warning: CPD refinement hit max iterations"
    if not partition:
        return c, None, np.arange(k), status, fit
    labels = cluster_columns(a, n_clusters=n_clusters, threshold=1.0 - cluster_tol)
    order = np.argsort(labels, kind="stable")
    d = tuple(int(np.sum(labels == g)) for g in range(labels.max() + 1))
    n = c[:, order]
    return n, d, order, status, fit


def _sym_basis(d):
    """Basis of d x d symmetric matrices as columns of a d^2 x d(d+1)/2 map."""
    cols = []
    for i in range(d):
        for j in range(i, d):
            m = np.zeros((d, d))
            m[i, j] += 1.0
            m[j, i] += 1.0
            if i == j:
                m[i, i] = 1.0
            cols.append(m.ravel(order="F"))
    return np.column_stack(cols)


def recover_coefficients(n, d, v_list):
    """Least-squares block-diagonal symmetric D_q with N D_q N.T ~= V_q."""
    offs = np.concatenate([[0], np.cumsum(d)])
    design_blocks = []
    for r in range(len(d)):
        nr = n[:, offs[r] : offs[r + 1]]
        design_blocks.append(np.kron(nr, nr) @ _sym_basis(d[r]))
    design = np.hstack(design_blocks)
    pinv_design = np.linalg.pinv(design, rcond=default_tol())
    out = []
    sizes = [d[r] * (d[r] + 1) // 2 for r in range(len(d))]
    for v in v_list:
        packed = pinv_design @ v.ravel(order="F")
        blocks = []
        pos = 0
        for r, sz in enumerate(sizes):
            coeffs = packed[pos : pos + sz]
            pos += sz
            m = np.zeros((d[r], d[r]), dtype=packed.dtype)
            idx = 0
            for i in range(d[r]):
                for j in range(i, d[r]):
                    m[i, j] = coeffs[idx]
                    m[j, i] = coeffs[idx]
                    idx += 1
            blocks.append(m)
        out.append(scipy.linalg.block_diag(*blocks))
    return tuple(out)


def solve_sjbd(
    problem,
    seed=0,
    rank_tol=None,
    evd_variant="single",
    omega=2.0,
    cluster_tol=1e-6,
):
    """Full S-JBD pipeline: compress, commutant basis, simultaneous EVD,
    coefficient recovery.

    When the slices only span an s-dimensional subspace with s < K (always
    the case when sum d_r < K), the V_q are first restricted to that joint
    column space; the diagonalizer is mapped back afterwards, so N is K x
    sum d_r with full column rank in exact mode.
    """
    if not isinstance(problem, SJBDProblem):
        problem = SJBDProblem(tuple(problem))
    v_list = list(problem.V)
    k = problem.K
    tol = default_tol() if rank_tol is None else rank_tol
    stacked = np.hstack(v_list)
    if problem.hint_sum_d is not None:
        s = problem.hint_sum_d
    else:
        s = numerical_rank(stacked, tol=tol)
    diagnostics = {"subspace_dim": int(s), "Q": problem.Q}
    if s < k:
        u_s = orth(stacked, dim=s)
        v_sub = [(u_s.conj().T @ v @ np.conj(u_s)) for v in v_list]
        v_sub = [(v + v.T) / 2.0 for v in v_sub]
    else:
        u_s = None
        v_sub = v_list
    sub_problem = SJBDProblem(
        tuple(v_sub), mode=problem.mode, hint_R=problem.hint_R
    )
    r_target = problem.hint_R if problem.mode == "approximate" else None
    r_found, u_mats = commutant_basis(sub_problem, r_target=r_target, tol=tol)
    diagnostics["commutant_dim"] = int(r_found)

    status = "ok"
    if evd_variant == "single":
        n_clusters = problem.hint_R if problem.mode == "approximate" else None
        n_sub, d = simultaneous_evd_single(
            u_mats, seed=seed, cluster_tol=cluster_tol, n_clusters=n_clusters
        )
    elif evd_variant == "cpd":
        n_sub, d, _perm, status, fit = simultaneous_evd_cpd(
            u_mats,
            omega=omega,
            seed=seed,
            n_clusters=problem.hint_R or r_found,
            cluster_tol=cluster_tol,
        )
        diagnostics["cpd_fit"] = float(fit)
    else:
        raise ValueError(f"unknown evd_variant {evd_variant!r}")

    n = u_s @ n_sub if u_s is not None else n_sub
    d_mats = recover_coefficients(n, d, v_list)
    expected_q = sum(dr * (dr + 1) // 2 for dr in d)
    diagnostics["expected_Q"] = int(expected_q)
    if problem.Q != expected_q and problem.mode == "exact":
        status = (
            "warning: Q does not match sum binom(d_r+1, 2); "
            "uniqueness guarantee does not apply"
        )
    if problem.Q < 3 and any(dr >= 2 for dr in d):
        status = "warning: fewer than 3 matrices; uniqueness guarantee does not apply"
    sol = SJBDSolution(N=n, d=tuple(int(x) for x in d), D=d_mats, status=status, diagnostics=diagnostics)
    diagnostics["reconstruction_error"] = float(np.max(sol.reconstruction_errors(v_list)))
    return sol
