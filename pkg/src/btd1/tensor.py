"""Dense third-order tensors, their unfoldings, and low multilinear-rank
block terms.

A tensor is stored as a C-contiguous ``(I, J, K)`` array, which is exactly
the lexicographic (i, j, k) order with k fastest.  ``vec`` always stacks
columns (column-major).  Horizontal slices ``H_i`` are ``t[i, :, :]``
(J x K), frontal slices ``T_k`` are ``t[:, :, k]`` (I x J).

A block-term decomposition collects a first factor matrix ``A`` (I x R,
columns a_r) and per-term factor pairs ``(B_r, C_r)`` of shapes
(J x L_r, K x L_r); the term matrices are ``E_r = B_r @ C_r.T`` with rank
at most ``L_r`` by construction, and the tensor they compose is
``sum_r a_r o E_r``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .linalg import DimensionError, default_tol, randn, rng

__all__ = [
    "Tensor3",
    "BlockTermDecomposition",
    "NoiseSpec",
    "unfold",
    "compose",
    "random_btd",
    "add_noise",
    "compress_third_mode",
    "match_decompositions",
]


def _as_field(values):
    return "complex" if np.iscomplexobj(values) else "real"


@dataclass(frozen=True)
class Tensor3:
    """Dense I x J x K tensor over the real or complex numbers."""

    values: np.ndarray
    field: str = "real"

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 3:
            raise DimensionError(f"expected a 3-way array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("tensor entries must be finite")
        if self.field not in ("real", "complex"):
            raise ValueError(f"unknown field tag {self.field!r}")
        if self.field == "real" and np.iscomplexobj(v):
            raise ValueError("field tag 'real' but complex values given")
        dtype = np.complex128 if self.field == "complex" else None
        if v.dtype.kind in "iub" and self.field == "real":
            dtype = None  # keep integer tensors exact
        v = np.ascontiguousarray(v, dtype=dtype)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_array(cls, values):
        return cls(np.asarray(values), _as_field(values))

    @property
    def dims(self):
        return self.values.shape

    @property
    def flat_values(self):
        """Entries in lexicographic (i, j, k) order, k fastest."""
        return self.values.ravel(order="C")

    def horizontal_slices(self):
        """List of the J x K slices H_i."""
        return [self.values[i] for i in range(self.dims[0])]

    def frontal_slices(self):
        """List of the I x J slices T_k."""
        return [self.values[:, :, k] for k in range(self.dims[2])]

    def norm(self):
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class BlockTermDecomposition:
    """First factor matrix plus the per-term (B_r, C_r) pairs."""

    A: np.ndarray
    terms: tuple

    def __post_init__(self):
        a = np.array(self.A)
        if a.ndim != 2:
            raise DimensionError("A must be an I x R matrix")
        terms = tuple((np.array(b), np.array(c)) for b, c in self.terms)
        if a.shape[1] != len(terms):
            raise DimensionError(
                f"A has {a.shape[1]} columns but {len(terms)} terms were given"
            )
        if np.any(np.linalg.norm(a, axis=0) == 0):
            raise ValueError("columns of A must be nonzero")
        for r, (b, c) in enumerate(terms):
            if b.ndim != 2 or c.ndim != 2 or b.shape[1] != c.shape[1]:
                raise DimensionError(f"term {r}: B_r and C_r must share column count")
            if r > 0 and (b.shape[0] != terms[0][0].shape[0] or c.shape[0] != terms[0][1].shape[0]):
                raise DimensionError("all terms must share J and K")
        a.flags.writeable = False
        for b, c in terms:
            b.flags.writeable = False
            c.flags.writeable = False
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "terms", terms)

    @property
    def R(self):
        return len(self.terms)

    @property
    def sizes(self):
        return tuple(b.shape[1] for b, _ in self.terms)

    @property
    def dims(self):
        return (self.A.shape[0], self.terms[0][0].shape[0], self.terms[0][1].shape[0])

    @property
    def B(self):
        return np.hstack([b for b, _ in self.terms])

    @property
    def C(self):
        return np.hstack([c for _, c in self.terms])

    def term_matrices(self):
        """The J x K matrices E_r = B_r @ C_r.T."""
        return [b @ c.T for b, c in self.terms]

    def term_columns(self):
        """Matrix [a_1 kron vec(E_1), ..., a_R kron vec(E_R)], IJK x R."""
        cols = [
            np.kron(self.A[:, r], e.ravel(order="F"))
            for r, e in enumerate(self.term_matrices())
        ]
        return np.column_stack(cols)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white noise at a target SNR in dB; infinite SNR means exact."""

    snr_db: float
    seed: int = 0

    def __post_init__(self):
        if np.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")

    @property
    def exact(self):
        return np.isinf(self.snr_db) and self.snr_db > 0


def unfold(t, mode):
    """Matrix unfolding of a tensor.

    mode 1: JK x I, columns vec(H_i); mode 2: IK x J, stacked H_i.T;
    mode 3: IJ x K, stacked H_i.  With factored input these satisfy

        T_(1) = [vec(E_1) ... vec(E_R)] A.T
        T_(2) = [a_1 kron C_1 ... a_R kron C_R] B.T
        T_(3) = [a_1 kron B_1 ... a_R kron B_R] C.T
    """
    v = t.values if isinstance(t, Tensor3) else np.asarray(t)
    i_dim, j_dim, k_dim = v.shape
    if mode == 1:
        # vec stacks columns, so vec(H_i) has j fastest
        return v.transpose(2, 1, 0).reshape(j_dim * k_dim, i_dim)
    if mode == 2:
        return v.transpose(0, 2, 1).reshape(i_dim * k_dim, j_dim)
    if mode == 3:
        return v.reshape(i_dim * j_dim, k_dim)
    raise DimensionError(f"mode must be 1, 2 or 3, got {mode}")


def compose(d, dims=None):
    """Tensor with entries t_ijk = sum_r a_ir (B_r C_r.T)_jk."""
    i_dim, j_dim, k_dim = d.dims
    if dims is not None and tuple(dims) != (i_dim, j_dim, k_dim):
        raise DimensionError(f"factors give dims {(i_dim, j_dim, k_dim)}, expected {tuple(dims)}")
    out = np.zeros((i_dim, j_dim, k_dim), dtype=np.result_type(d.A, *[b for b, _ in d.terms]))
    for r, e in enumerate(d.term_matrices()):
        out += d.A[:, r][:, None, None] * e[None, :, :]
    return Tensor3(out, _as_field(out))


def random_btd(dims, sizes, field="real", seed=0):
    """Decomposition with i.i.d. standard normal factor entries.

    Deterministic for a given seed.  Requires L_r <= min(J, K).
    """
    i_dim, j_dim, k_dim = dims
    sizes = tuple(int(s) for s in sizes)
    if any(s < 1 for s in sizes):
        raise DimensionError("term sizes must be positive")
    if max(sizes) > min(j_dim, k_dim):
        raise DimensionError("term sizes must not exceed min(J, K)")
    gen = rng(seed)
    a = randn(gen, (i_dim, len(sizes)), field)
    terms = tuple(
        (randn(gen, (j_dim, s), field), randn(gen, (k_dim, s), field)) for s in sizes
    )
    return BlockTermDecomposition(a, terms)


def add_noise(t, spec):
    """t + c*N with N i.i.d. standard normal and c set by the requested SNR.

    SNR[dB] = 10 log10(|T|_F^2 / |cN|_F^2).
    """
    if t.norm() == 0:
        raise ValueError("cannot set an SNR against the zero tensor")
    if spec.exact:
        return t
    gen = rng(spec.seed)
    noise = randn(gen, t.dims, t.field)
    c = t.norm() / (np.linalg.norm(noise) * 10.0 ** (spec.snr_db / 20.0))
    return Tensor3(np.asarray(t.values, dtype=np.result_type(t.values, noise)) + c * noise, t.field)


def compress_third_mode(t, tol=None, rank=None):
    """Replace the third mode by an orthonormal mixing of the frontal slices.

    Returns ``(compressed, mixing, rank)`` where ``unfold(compressed, 3)`` is
    the left factor of the compact SVD of ``unfold(t, 3)``, ``rank`` its
    numerical rank, and ``mixing`` the rank x K matrix with
    ``unfold(t, 3) = unfold(compressed, 3) @ mixing``.  The compressed tensor
    shares the first two factor matrices with ``t``; the third factor matrix
    of ``t`` is recoverable as ``([a_1 kron B_1 ...]^+ @ unfold(t, 3)).T``.
    """
    t3 = unfold(t, 3)
    u, s, vh = np.linalg.svd(t3, full_matrices=False)
    if rank is None:
        tol = default_tol() if tol is None else tol
        rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    u = u[:, :rank]
    mixing = s[:rank, None] * vh[:rank]
    i_dim, j_dim, _ = t.dims
    compressed = Tensor3(u.reshape(i_dim, j_dim, rank), _as_field(u))
    return compressed, mixing, rank


def match_decompositions(truth, est, return_matched=False):
    """Align an estimate with a reference decomposition and measure errors.

    Columns are matched by maximising aggregate absolute normalized
    correlation of the term columns ``a_r kron vec(E_r)`` (linear assignment),
    then each matched column of the estimate is rescaled by its least-squares
    optimal factor.  Returns ``(permutation, scales, err_A, err_terms)`` with
    relative Frobenius errors on A and on the term-column matrix.  Both
    errors are invariant under permutation and (lambda a_r, E_r / lambda)
    counter-scaling of the estimate.
    """
    if truth.R != est.R:
        raise DimensionError(f"decompositions have {truth.R} and {est.R} terms")
    g_true = truth.term_columns()
    g_est = est.term_columns()
    nt = np.linalg.norm(g_true, axis=0)
    ne = np.linalg.norm(g_est, axis=0)
    corr = np.abs(g_true.conj().T @ g_est) / np.outer(nt, ne + (ne == 0))
    row, col = scipy.optimize.linear_sum_assignment(-corr)
    perm = np.empty(truth.R, dtype=int)
    perm[row] = col

    def _opt_scale(x, ref):
        denom = float(np.real(np.vdot(x, x)))
        return np.vdot(x, ref) / denom if denom > 0 else 0.0

    num = 0.0
    for r in range(truth.R):
        x = g_est[:, perm[r]]
        s = _opt_scale(x, g_true[:, r])
        num += np.linalg.norm(s * x - g_true[:, r]) ** 2
    err_terms = float(np.sqrt(num) / np.linalg.norm(g_true))
    scales = np.empty(truth.R, dtype=np.result_type(truth.A, est.A, np.float64))
    num = 0.0
    for r in range(truth.R):
        x = est.A[:, perm[r]]
        scales[r] = _opt_scale(x, truth.A[:, r])
        num += np.linalg.norm(scales[r] * x - truth.A[:, r]) ** 2
    err_a = float(np.sqrt(num) / np.linalg.norm(truth.A))
    if return_matched:
        safe = np.where(scales == 0, 1.0, scales)
        matched = BlockTermDecomposition(
            est.A[:, perm] * safe[None, :],
            tuple(
                (est.terms[perm[r]][0] / safe[r], est.terms[perm[r]][1])
                for r in range(truth.R)
            ),
        )
        return perm, scales, err_a, err_terms, matched
    return perm, scales, err_a, err_terms
