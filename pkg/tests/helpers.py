"""Shared test utilities: brute-force oracles and reference instances."""

import numpy as np

from btd1 import BlockTermDecomposition
from btd1.linalg import rng


def naive_compose(a, terms):
    """Triple-loop evaluation of t_ijk = sum_r a_ir (B_r C_r.T)_jk."""
    i_dim = a.shape[0]
    j_dim = terms[0][0].shape[0]
    k_dim = terms[0][1].shape[0]
    dtype = np.result_type(a, *(b for b, _ in terms))
    out = np.zeros((i_dim, j_dim, k_dim), dtype=dtype)
    for r in range(a.shape[1]):
        e = terms[r][0] @ terms[r][1].T
        for i in range(i_dim):
            for j in range(j_dim):
                for k in range(k_dim):
                    out[i, j, k] += a[i, r] * e[j, k]
    return out


def naive_unfold3(a, terms):
    """[a_1 kron B_1 ... a_R kron B_R] C.T by independent summation."""
    blocks = [np.kron(a[:, r : r + 1], terms[r][0]) for r in range(a.shape[1])]
    c = np.hstack([cr for _, cr in terms])
    return np.hstack(blocks) @ c.T


def naive_unfold1(a, terms):
    """[vec(E_1) ... vec(E_R)] A.T by independent summation."""
    vec_e = np.column_stack([(b @ c.T).ravel(order="F") for b, c in terms])
    return vec_e @ a.T


def shared_columns_instance(r, seed=0, field="real"):
    """The structured R x (R+2) x (R+2) instance with shared b/c columns:
    every term has size 3 and every d_r equals 1."""
    from btd1.linalg import randn

    gen = rng(seed)
    a = randn(gen, (r, r), field)
    b = [randn(gen, r + 2, field) for _ in range(3 * r - 2)]
    c = [randn(gen, r + 2, field) for _ in range(r + 2)]
    terms = []
    for idx in range(1, r + 1):
        if idx == 1:
            b_r = np.column_stack([b[0], b[1], b[2]])
        elif idx == 2:
            b_r = np.column_stack([b[0], b[1], b[3]])
        else:
            b_r = np.column_stack([b[3 * idx - 5], b[3 * idx - 4], b[3 * idx - 3]])
        c_r = np.column_stack([c[0], c[1], c[idx + 1]])
        terms.append((b_r, c_r))
    return BlockTermDecomposition(a, tuple(terms))


def golden_integer_instance():
    """The 3 x 3 x 5 integer instance with sizes (1, 1, 1, 2) and C the
    identity; its minor matrix is the printed 9 x 15 golden matrix."""
    a = np.array([[1, 0, 0, 1], [0, 1, 0, 1], [0, 0, 1, 1]])
    b = np.array([[1, 1, 1, 0, 0], [1, 2, 0, 1, 0], [1, 3, 0, 0, 1]])
    c = np.eye(5, dtype=np.int64)
    terms = (
        (b[:, 0:1], c[:, 0:1]),
        (b[:, 1:2], c[:, 1:2]),
        (b[:, 2:3], c[:, 2:3]),
        (b[:, 3:5], c[:, 3:5]),
    )
    return BlockTermDecomposition(a, terms)


GOLDEN_Q2_3x3x5 = np.array(
    [
        [0, 1, 0, 1, 0, 0, 0, -1, 0, 0, 0, 0, 0, 0, 0],
        [0, 2, 0, 0, 1, 0, 0, 0, -1, 0, 0, 0, 0, 0, 0],
        [0, 1, 0, -1, 1, 0, 0, 3, -2, 0, 0, 0, 0, 0, 0],
        [0, 0, -1, 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 0, 0],
        [0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 0],
        [0, 0, 0, -1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, -2, 1, 0, 0, -1, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, -3, 0, 1, 0, 0, -1, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, -3, 2, 0, 0, 0, 0, 0, 0],
    ],
    dtype=np.int64,
)


def block_subspace_match(est_blocks, true_blocks):
    """Greedy matching of block column spaces; returns the largest principal
    angle over the best assignment (blocks must agree in size multiset)."""
    from btd1.linalg import subspace_distance

    est = list(est_blocks)
    true = list(true_blocks)
    assert sorted(b.shape[1] for b in est) == sorted(b.shape[1] for b in true)
    worst = 0.0
    remaining = list(range(len(true)))
    for e in est:
        dists = [
            subspace_distance(e, true[i]) if true[i].shape[1] == e.shape[1] else np.inf
            for i in remaining
        ]
        pick = int(np.argmin(dists))
        worst = max(worst, dists[pick])
        remaining.pop(pick)
    return worst
