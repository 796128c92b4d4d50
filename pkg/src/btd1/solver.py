"""End-to-end recovery of a decomposition into multilinear rank-(1, L_r, L_r)
terms.

Phase I recovers the first factor matrix: the null space of the minor matrix
Q2(T) is mapped to a set of symmetric K x K matrices, their joint block
diagonalization yields blocks N_r spanning the null spaces of the stacked
complementary term matrices, and each column a_r then falls out of a rank-one
factorization of [vec(N_r.T H_1.T) ... vec(N_r.T H_I.T)].

Phase II recovers the term matrices under one of three conditions, tried in
this order: the third factor matrix is square nonsingular (Case 1, solve for
C directly), the first factor matrix has full column rank (Case 2, solve for
the E_r from the mode-1 unfolding), or neither (Case 3, split the terms into
overlapping groups, project onto two-slice subtensors, and decompose each by
a generalized eigendecomposition).

Noisy data is handled in two regimes: scenario 1 assumes the perturbation is
small enough that the structural integers (Q, R, d_r) are still detectable
from singular-value gaps; scenario 2 assumes only R and sum L_r are known
and replaces the null-space dimension by its minimum over the compatible
block-size tuples, recovering the block structure afterwards by clustering.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .linalg import (
    DimensionError,
    SolverDiagnostic,
    default_tol,
    dominant_rank1,
    lstsq,
    null_space,
    numerical_rank,
    orth,
    randn,
    rng,
    truncated_svd,
)
from .minors import build_Q2
from .sjbd import (
    _cluster_scalars,
    _realify_blocks,
    build_commutant_matrix,
    cluster_columns,
    simultaneous_evd_cpd,
    simultaneous_evd_single,
)
from .tensor import BlockTermDecomposition, Tensor3, compose, compress_third_mode, unfold

__all__ = [
    "SolverOptions",
    "SolveReport",
    "phase1_recover_A",
    "phase2_case1",
    "phase2_case2",
    "phase2_case3",
    "gevd_two_slice_btd",
    "estimate_L_from_d",
    "estimate_L_from_rank_system",
    "minimal_null_dimension",
    "candidate_size_tuples",
    "decompose",
]


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for :func:`decompose` and the phase functions.

    ``mode`` is one of ``exact``, ``noisy_scenario1`` (structural integers
    detectable from gaps at ``rank_tol``) or ``noisy_scenario2`` (only
    ``known_R`` and ``known_sum_L`` given).  ``evd_variant`` defaults to the
    single-combination EVD for exact data and to the least-squares
    refinement for noisy data.
    """

    case_hint: str = "auto"
    mode: str = "exact"
    known_R: int = None
    known_sum_L: int = None
    rank_tol: float = None
    omega: float = 2.0
    seed: int = 0
    evd_variant: str = None
    cluster_tol: float = None

    def __post_init__(self):
        if self.mode not in ("exact", "noisy_scenario1", "noisy_scenario2"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.case_hint not in ("auto", "1", "2", "3", 1, 2, 3):
            raise ValueError(f"unknown case hint {self.case_hint!r}")
        if self.mode == "noisy_scenario2" and (
            self.known_R is None or self.known_sum_L is None
        ):
            raise ValueError("noisy_scenario2 requires known_R and known_sum_L")

    @property
    def noisy(self):
        return self.mode != "exact"

    @property
    def tol(self):
        if self.rank_tol is not None:
            return self.rank_tol
        if self.noisy:
            return 1e-2
        env = os.environ.get("BTD_RANK_TOL")
        return float(env) if env else 1e-8

    @property
    def cl_tol(self):
        if self.cluster_tol is not None:
            return self.cluster_tol
        return 1e-2 if self.noisy else 1e-6

    @property
    def variant(self):
        if self.evd_variant is not None:
            return self.evd_variant
        return "cpd" if self.noisy else "single"


@dataclass(frozen=True)
class SolveReport:
    decomposition: BlockTermDecomposition
    detected_d: tuple
    detected_L: tuple
    case_used: int
    residual: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def detected_R(self):
        return len(self.detected_L)

    def to_dict(self):
        from .fileio import decomposition_to_dict

        return {
            "decomposition": decomposition_to_dict(self.decomposition),
            "detected_d": list(self.detected_d),
            "detected_L": list(self.detected_L),
            "detected_R": self.detected_R,
            "case_used": self.case_used,
            "residual": self.residual,
            "diagnostics": self.diagnostics,
        }


def _vec(m):
    return m.ravel(order="F")


def minimal_null_dimension(r, sum_d):
    """Smallest value of sum binom(d_r + 1, 2) over positive d summing to
    sum_d; the lower bound used in place of the true null-space dimension
    when only R and sum L_r are known."""
    best = None
    for d in _partitions(sum_d, r):
        val = sum(x * (x + 1) // 2 for x in d)
        if best is None or val < best:
            best = val
    return best


def _partitions(total, parts, minimum=1):
    if parts == 1:
        if total >= minimum:
            yield (total,)
        return
    for first in range(minimum, total - (parts - 1) * minimum + 1):
        for rest in _partitions(total - first, parts - 1, minimum=first):
            yield (first,) + rest


def candidate_size_tuples(r, k, sum_l):
    """All sorted L-tuples consistent with known R and sum L_r; the rows of
    the detection-frequency tables."""
    sum_d = r * k - (r - 1) * sum_l
    shift = sum_l - k
    tuples = []
    for d in _partitions(sum_d, r):
        l = tuple(x + shift for x in d)
        if all(x >= 1 for x in l):
            tuples.append(l)
    return tuples


def estimate_L_from_d(d, k, r):
    """Term sizes from block sizes: L_r = d_r + (K - sum d) / (R - 1).

    Valid when the stacked complementary third-factor blocks have full
    column rank, which holds generically.  Raises when the shared increment
    is farther than 0.25 from an integer.
    """
    d = tuple(int(x) for x in d)
    if len(d) != r:
        raise DimensionError(f"expected {r} block sizes, got {len(d)}")
    if r == 1:
        if k != d[0]:
            raise SolverDiagnostic(
                "single-term size is undetermined unless K = d_1",
                {"K": k, "d": d},
            )
        return (d[0],)
    inc = (k - sum(d)) / (r - 1)
    if abs(inc - round(inc)) > 0.25:
        raise SolverDiagnostic(
            "block sizes are inconsistent with an integer size increment",
            {"increment": inc, "d": d, "K": k},
        )
    inc = int(round(inc))
    l = tuple(x + inc for x in d)
    if any(x < 1 for x in l):
        raise SolverDiagnostic("estimated sizes are not positive", {"L": l})
    return l


def estimate_L_from_rank_system(subset_ranks, r, r_a=None):
    """Term sizes from subset rank equations sum_{r in Omega_m} L_r = rank_m.

    ``subset_ranks`` is a list of (Omega_m, rank) pairs with 0-based index
    sets.  Solved in least squares with rounding to positive integers;
    rounding farther than 0.25 or a rank-deficient incidence matrix raises.
    """
    m_count = len(subset_ranks)
    a = np.zeros((m_count, r))
    b = np.zeros(m_count)
    for m, (omega, rank) in enumerate(subset_ranks):
        for idx in omega:
            a[m, idx] = 1.0
        b[m] = rank
        if r_a is not None and len(omega) != r - r_a + 2:
            raise DimensionError(
                f"subset {m} has cardinality {len(omega)}, expected {r - r_a + 2}"
            )
    if numerical_rank(a) < r:
        raise SolverDiagnostic(
            "subset incidence matrix is rank deficient; sizes not identifiable",
            {"n_subsets": m_count, "R": r},
        )
    x = lstsq(a, b)
    rounded = np.round(x).astype(int)
    if np.max(np.abs(x - rounded)) > 0.25:
        raise SolverDiagnostic(
            "rank system solution is too far from integers",
            {"solution": x.tolist()},
        )
    if np.any(rounded < 1):
        raise SolverDiagnostic("rank system gives non-positive sizes", {"L": rounded.tolist()})
    return tuple(int(v) for v in rounded)


def _rank1_pair(t, n_r):
    """Column direction a_r and the matching B_r from the rank-one matrix
    [vec(N_r.T H_1.T) ... vec(N_r.T H_I.T)] = vec(N_r.T E_r.T) a_r.T."""
    values = t.values
    i_dim, j_dim, _ = values.shape
    cols = [_vec(n_r.T @ values[i].T) for i in range(i_dim)]
    m = np.column_stack(cols)
    w, z = dominant_rank1(m)
    b_r = w.reshape(n_r.shape[1], j_dim, order="F").T
    return z, b_r, m


def _khatri_rao_blocks(a, blocks):
    return np.hstack([np.kron(a[:, r : r + 1], blocks[r]) for r in range(len(blocks))])


def phase1_recover_A(t, opts=None):
    """Phase I of the solver: returns (A, N, d, Q_used, diagnostics).

    N is K x sum(d) with block r spanning the common null space of the term
    matrices other than r; callers should compress the third mode first when
    unfold(t, 3) is column rank deficient.
    """
    opts = opts or SolverOptions()
    i_dim, j_dim, k_dim = t.dims
    diag = {}
    q2set = build_Q2(t)
    q2 = q2set.Q2
    # entries of the minor matrix are quadratic in the tensor; anything below
    # rounding level on that scale is noise even when the whole matrix is
    # numerically zero (single-term tensors), so the relative threshold gets
    # an absolute floor there
    q2_floor = 1e-12 * float(np.linalg.norm(t.values)) ** 2

    if opts.mode == "noisy_scenario2":
        r_known = opts.known_R
        sum_d = r_known * k_dim - (r_known - 1) * opts.known_sum_L
        if sum_d < r_known:
            raise SolverDiagnostic(
                "known R and sum L give an impossible total block size",
                {"sum_d": sum_d, "R": r_known},
            )
        q_used = minimal_null_dimension(r_known, sum_d)
    else:
        sv = np.linalg.svd(q2, compute_uv=False)
        threshold = max(opts.tol * (sv[0] if sv.size else 0.0), q2_floor)
        q_used = int(np.sum(sv <= threshold)) + q2.shape[1] - sv.size
        sum_d = None
    if q_used < 1:
        raise SolverDiagnostic(
            "minor matrix has trivial null space; no block structure visible",
            {"Q": q_used},
        )
    diag["Q_used"] = int(q_used)

    v_mats = q2set.symmetric_null_matrices(dim=q_used)

    # restrict to the joint column space of the V_q (dimension sum d_r)
    stacked = np.hstack(v_mats)
    if sum_d is None:
        sum_d = numerical_rank(stacked, tol=opts.tol)
    diag["sum_d"] = int(sum_d)
    if sum_d < k_dim:
        u_s = orth(stacked, dim=sum_d)
        v_sub = [(u_s.conj().T @ v @ np.conj(u_s)) for v in v_mats]
        v_sub = [(v + v.T) / 2.0 for v in v_sub]
    else:
        u_s = None
        v_sub = v_mats

    m = build_commutant_matrix(v_sub)
    if opts.mode == "noisy_scenario2":
        r_detected = opts.known_R
        basis = null_space(m, dim=r_detected)
    else:
        sv = np.linalg.svd(m, compute_uv=False)
        r_detected = int(np.sum(sv <= opts.tol * sv[0])) if sv[0] > 0 else m.shape[1]
        basis = null_space(m, dim=r_detected)
    if r_detected < 1:
        raise SolverDiagnostic("empty commutant basis", {"R": r_detected})
    diag["commutant_dim"] = int(r_detected)
    u_mats = [basis[:, i].reshape(v_sub[0].shape[0], -1, order="F") for i in range(basis.shape[1])]

    partition_by_clustering = opts.mode == "noisy_scenario2"
    if opts.variant == "cpd":
        n_sub, d, _perm, status, fit = simultaneous_evd_cpd(
            u_mats,
            omega=opts.omega,
            seed=opts.seed,
            n_clusters=r_detected,
            cluster_tol=opts.cl_tol,
            partition=not partition_by_clustering,
        )
        diag["cpd_status"] = status
        diag["cpd_fit"] = float(fit)
    else:
        n_sub, d = simultaneous_evd_single(
            u_mats,
            seed=opts.seed,
            cluster_tol=opts.cl_tol,
            n_clusters=r_detected if opts.noisy else None,
        )
        if partition_by_clustering:
            d = None
    n_full = u_s @ n_sub if u_s is not None else n_sub

    if partition_by_clustering or d is None:
        n_full, d = _partition_by_unfolding(t, n_full, r_detected, opts)
    d = tuple(int(x) for x in d)
    if opts.mode == "exact" and q_used != sum(x * (x + 1) // 2 for x in d):
        raise SolverDiagnostic(
            "null-space dimension of the minor matrix does not match "
            "sum binom(d_r+1, 2); the structural assumption fails",
            {"Q": q_used, "d": d},
        )

    offs = np.concatenate([[0], np.cumsum(d)])
    a_cols = []
    for r in range(len(d)):
        n_r = n_full[:, offs[r] : offs[r + 1]]
        a_r, _, _ = _rank1_pair(t, n_r)
        a_cols.append(a_r)
    a = np.column_stack(a_cols)
    return a, n_full, d, q_used, diag


def _partition_by_unfolding(t, n_full, r_clusters, opts):
    """Scenario-2 block detection: columns of unfold(T,3) N reshape to
    rank-one matrices a_r w.T; cluster their left directions into R groups."""
    i_dim, j_dim, _ = t.dims
    t3n = unfold(t, 3) @ n_full
    dirs = []
    for col in range(t3n.shape[1]):
        m = t3n[:, col].reshape(i_dim, j_dim)
        u, _, _ = np.linalg.svd(m, full_matrices=False)
        dirs.append(u[:, 0])
    labels = cluster_columns(np.column_stack(dirs), n_clusters=r_clusters)
    order = np.argsort(labels, kind="stable")
    d = tuple(int(np.sum(labels == g)) for g in range(labels.max() + 1))
    if len(d) != r_clusters:
        raise SolverDiagnostic(
            "column clustering found a different number of groups than R",
            {"R": r_clusters, "found": len(d)},
        )
    return n_full[:, order], d


def phase2_case1(t, a, n, d, opts=None):
    """Case 1 (third factor matrix square nonsingular, K = sum L_r): read
    B_r off the rank-one factorizations and solve for C in least squares."""
    opts = opts or SolverOptions()
    _, j_dim, k_dim = t.dims
    if k_dim != sum(d):
        raise SolverDiagnostic(
            "Case 1 requires K = sum d_r", {"K": k_dim, "sum_d": sum(d)}
        )
    offs = np.concatenate([[0], np.cumsum(d)])
    b_blocks = []
    for r in range(len(d)):
        n_r = n[:, offs[r] : offs[r + 1]]
        _, b_r, _ = _rank1_pair(t, n_r)
        b_blocks.append(b_r)
    design = _khatri_rao_blocks(a, b_blocks)
    c = lstsq(design, unfold(t, 3)).T
    terms = tuple(
        (b_blocks[r], c[:, offs[r] : offs[r + 1]]) for r in range(len(d))
    )
    return BlockTermDecomposition(a, terms)


def phase2_case2(t, a, opts=None, sizes=None):
    """Case 2 (first factor matrix of full column rank): the term matrices
    solve unfold(T,1) = [vec(E_1) ... vec(E_R)] A.T in least squares.

    ``sizes`` forces the truncation ranks (noisy pipelines); otherwise each
    L_r is the numerical rank of E_r.
    """
    opts = opts or SolverOptions()
    _, j_dim, k_dim = t.dims
    r = a.shape[1]
    if numerical_rank(a, tol=opts.tol) < r:
        raise SolverDiagnostic("Case 2 requires A with full column rank", {"R": r})
    vec_e = lstsq(a, unfold(t, 1).T).T
    terms = []
    for idx in range(r):
        e = vec_e[:, idx].reshape(j_dim, k_dim, order="F")
        l_r = sizes[idx] if sizes is not None else max(numerical_rank(e, tol=opts.tol), 1)
        b_r, c_r = truncated_svd(e, l_r)
        terms.append((b_r, c_r))
    return BlockTermDecomposition(a, tuple(terms))


def default_subsets(r, r_a):
    """Covering family of term subsets: ceil(R / (R - r_A + 2)) consecutive
    windows with the last one right-aligned."""
    card = r - r_a + 2
    m_count = math.ceil(r / card)
    subsets = []
    for m in range(m_count - 1):
        subsets.append(tuple(range(m * card, (m + 1) * card)))
    subsets.append(tuple(range(r - card, r)))
    return subsets


def phase2_case3(t, a, opts=None, subsets=None, sizes=None):
    """Case 3 (neither factor matrix square enough): decompose two-slice
    projections onto subsets of terms by generalized EVD, then resolve the
    global term scales against the mode-1 unfolding."""
    opts = opts or SolverOptions()
    i_dim, j_dim, k_dim = t.dims
    r = a.shape[1]
    r_a = numerical_rank(a, tol=opts.tol)
    if r_a >= r:
        raise SolverDiagnostic("Case 3 expects rank(A) < R", {"rank_A": r_a, "R": r})
    card = r - r_a + 2
    if subsets is None:
        subsets = default_subsets(r, r_a)
    covered = set()
    for s in subsets:
        covered.update(s)
    if covered != set(range(r)):
        raise SolverDiagnostic("subsets do not cover all terms", {"subsets": subsets})

    col_a = orth(a, dim=r_a)
    t1 = unfold(t, 1)
    e_hat = [None] * r
    gen = rng(opts.seed)
    for m_idx, omega in enumerate(subsets):
        if len(omega) != card:
            raise SolverDiagnostic(
                f"subset {m_idx} has cardinality {len(omega)}, expected {card}",
                {"subset": omega},
            )
        excluded = [p for p in range(r) if p not in omega]
        if excluded:
            # plain transpose even over the complex field
            g = a[:, excluded].T @ col_a
            y = null_space(g, tol=opts.tol)
            if y.shape[1] < 2:
                raise SolverDiagnostic(
                    "could not find two independent projection directions; "
                    "k-rank of A is below its rank",
                    {"subset": omega},
                )
            h = col_a @ y[:, :2]
        else:
            h = col_a[:, :2]
        q1 = t1 @ h
        q_values = np.stack(
            [q1[:, s].reshape(j_dim, k_dim, order="F") for s in range(2)]
        )
        sub = gevd_two_slice_btd(
            Tensor3(q_values, "complex" if np.iscomplexobj(q_values) else "real"),
            tol=opts.tol,
            seed=int(gen.integers(2**31)),
            cluster_tol=opts.cl_tol,
            n_terms=len(omega),
        )
        if sub.R != len(omega):
            raise SolverDiagnostic(
                f"two-slice decomposition for subset {m_idx} found {sub.R} terms, "
                f"expected {len(omega)}",
                {"subset": omega, "found": sub.R},
            )
        # match recovered terms to the subset indices through the projected A
        proj = h.T @ a[:, omega]
        na = np.linalg.norm(sub.A, axis=0)
        npj = np.linalg.norm(proj, axis=0)
        corr = np.abs(sub.A.conj().T @ proj) / np.outer(na, npj)
        rows, cols = scipy.optimize.linear_sum_assignment(-corr)
        for s_idx, o_idx in zip(rows, cols):
            target = omega[o_idx]
            if e_hat[target] is None:
                b_s, c_s = sub.terms[s_idx]
                e_hat[target] = b_s @ c_s.T
    design = np.column_stack([np.kron(a[:, idx], _vec(e_hat[idx])) for idx in range(r)])
    x = lstsq(design, _vec(t1))
    terms = []
    for idx in range(r):
        e = x[idx] * e_hat[idx]
        l_r = sizes[idx] if sizes is not None else max(numerical_rank(e, tol=opts.tol), 1)
        b_r, c_r = truncated_svd(e, l_r)
        terms.append((b_r, c_r))
    return BlockTermDecomposition(a, tuple(terms))


def gevd_two_slice_btd(q, tol=None, seed=0, cluster_tol=1e-6, n_terms=None):
    """Decomposition of a 2 x J x K tensor by generalized eigendecomposition.

    Assumes the second and third factor matrices of the underlying
    decomposition have full column rank and any two columns of the 2 x R
    first factor matrix are independent.  Two generic slice mixtures reduce
    to a matrix pencil; eigenvalue multiplicities give the term sizes,
    eigenvector groups the column spaces of the B_r.
    """
    tol = default_tol() if tol is None else tol
    if q.dims[0] != 2:
        raise DimensionError("two-slice decomposition needs a 2 x J x K tensor")
    h1, h2 = q.values[0], q.values[1]
    s = numerical_rank(np.vstack([h1, h2]), tol=tol)
    if s == 0:
        raise SolverDiagnostic("zero tensor has no two-slice decomposition", {})
    u = orth(np.hstack([h1, h2]), dim=s)
    v = orth(np.hstack([h1.T, h2.T]), dim=s)
    g1 = u.conj().T @ h1 @ np.conj(v)
    g2 = u.conj().T @ h2 @ np.conj(v)
    gen = rng(seed)
    complex_input = np.iscomplexobj(h1)
    mix = randn(gen, (2, 2), "complex" if complex_input else "real")
    s_a = mix[0, 0] * g1 + mix[0, 1] * g2
    s_b = mix[1, 0] * g1 + mix[1, 1] * g2
    if numerical_rank(s_a, tol=tol) < s:
        raise SolverDiagnostic("degenerate pencil: generic mixture is singular", {})
    w = s_b @ np.linalg.inv(s_a)
    vals, vecs = np.linalg.eig(w)
    if numerical_rank(vecs, tol=1e-10) < s:
        raise SolverDiagnostic("degenerate pencil: defective eigenstructure", {})
    labels = _cluster_scalars(vals, cluster_tol, n_clusters=n_terms)
    n_grp = labels.max() + 1
    blocks = []
    means = []
    for grp in range(n_grp):
        idx = np.nonzero(labels == grp)[0]
        blocks.append(orth(vecs[:, idx], dim=idx.size))
        means.append(vals[idx].mean())
    if not complex_input:
        blocks, realified = _realify_blocks(blocks, means, max(cluster_tol, 1e-8))
        if realified:
            means = [np.real(mn) for mn in means]
    a_cols = []
    b_blocks = []
    for grp in range(n_grp):
        lam = means[grp]
        a_grp = np.linalg.solve(mix, np.array([1.0, lam], dtype=np.result_type(mix, lam)))
        a_cols.append(a_grp)
        b_blocks.append(u @ blocks[grp])
    a = np.column_stack(a_cols)
    design = _khatri_rao_blocks(a, b_blocks)
    q3 = unfold(q, 3)
    c = lstsq(design, q3).T
    offs = np.concatenate([[0], np.cumsum([b.shape[1] for b in b_blocks])])
    terms = tuple(
        (b_blocks[grp], c[:, offs[grp] : offs[grp + 1]]) for grp in range(n_grp)
    )
    return BlockTermDecomposition(a, terms)


def _select_case(k_dim, i_dim, d, a, opts):
    if opts.case_hint != "auto":
        return int(opts.case_hint)
    if k_dim == sum(d):
        return 1
    r = len(d)
    if r <= i_dim and numerical_rank(a, tol=opts.tol) == r:
        return 2
    return 3


def decompose(t, opts=None):
    """Full pipeline: compress the third mode if rank deficient, run Phase I
    and the applicable Phase II case, estimate the term sizes, and report.

    Case selection honors ``opts.case_hint`` and otherwise prefers Case 1
    over Case 2 over Case 3.
    """
    opts = opts or SolverOptions()
    i_dim, j_dim, k_dim = t.dims
    diag = {}

    original = t
    mixing = None
    if not opts.noisy:
        r3 = numerical_rank(unfold(t, 3), tol=opts.tol)
        if r3 < k_dim:
            t, mixing, r3 = compress_third_mode(t, rank=r3)
            k_dim = r3
            diag["compressed_K"] = int(r3)

    a, n, d, q_used, phase1_diag = phase1_recover_A(t, opts)
    diag.update(phase1_diag)
    r = len(d)
    case = _select_case(k_dim, i_dim, d, a, opts)
    diag["case_considered"] = case

    sizes = None
    if opts.noisy:
        sizes = estimate_L_from_d(d, k_dim, r)
    if case == 1:
        est = phase2_case1(t, a, n, d, opts)
        detected_l = tuple(d)
    elif case == 2:
        est = phase2_case2(t, a, opts, sizes=sizes)
        detected_l = est.sizes
    else:
        est = phase2_case3(t, a, opts, sizes=sizes)
        detected_l = est.sizes

    if mixing is not None:
        # map the compressed third factor back to the original tensor
        b_blocks = [b for b, _ in est.terms]
        design = _khatri_rao_blocks(est.A, b_blocks)
        c_full = lstsq(design, unfold(original, 3)).T
        offs = np.concatenate([[0], np.cumsum(est.sizes)])
        est = BlockTermDecomposition(
            est.A,
            tuple(
                (b_blocks[idx], c_full[:, offs[idx] : offs[idx + 1]])
                for idx in range(r)
            ),
        )

    recon = compose(est)
    residual = float(
        np.linalg.norm(recon.values - original.values) / np.linalg.norm(original.values)
    )
    if not opts.noisy and residual > 1e-6:
        raise SolverDiagnostic(
            f"exact-mode reconstruction failed (residual {residual:.2e}); "
            f"the rank conditions backing case {case} do not hold",
            {**diag, "case": case, "residual": residual},
        )
    return SolveReport(
        decomposition=est,
        detected_d=tuple(d),
        detected_L=tuple(int(x) for x in detected_l),
        case_used=case,
        residual=residual,
        diagnostics=diag,
    )
