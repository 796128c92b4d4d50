import numpy as np
import pytest

from btd1.linalg import (
    cond,
    default_tol,
    dominant_rank1,
    null_space,
    numerical_rank,
    orth,
    principal_angles,
    randn,
    rng,
    subspace_distance,
    truncated_svd,
)


def test_env_override(monkeypatch):
    monkeypatch.setenv("BTD_RANK_TOL", "1e-4")
    assert default_tol() == 1e-4
    monkeypatch.delenv("BTD_RANK_TOL")
    assert default_tol() == 1e-10


def test_numerical_rank_threshold():
    m = np.diag([1.0, 1e-3, 1e-12])
    assert numerical_rank(m) == 2
    assert numerical_rank(m, tol=1e-14) == 3
    assert numerical_rank(np.zeros((3, 2))) == 0


def test_null_space_dimensions():
    gen = rng(0)
    a = gen.standard_normal((4, 6))
    ns = null_space(a)
    assert ns.shape == (6, 2)
    assert np.linalg.norm(a @ ns) < 1e-12
    ns3 = null_space(a, dim=3)
    assert ns3.shape == (6, 3)


def test_rng_determinism_and_complex_normal():
    a = randn(rng(5), (100000,), "complex")
    b = randn(rng(5), (100000,), "complex")
    assert np.array_equal(a, b)
    # unit variance, circularly symmetric
    assert abs(np.mean(np.abs(a) ** 2) - 1.0) < 0.02
    assert abs(np.mean(a**2)) < 0.02


def test_subspace_distance_and_angles():
    gen = rng(1)
    u = orth(gen.standard_normal((8, 3)))
    q = np.linalg.qr(gen.standard_normal((3, 3)))[0]
    assert subspace_distance(u, u @ q) < 1e-10
    v = orth(gen.standard_normal((8, 3)))
    assert subspace_distance(u, v) > 0.1
    assert principal_angles(u, v).shape == (3,)


def test_dominant_rank1_complex_orientation():
    gen = rng(2)
    x = gen.standard_normal(5) + 1j * gen.standard_normal(5)
    y = gen.standard_normal(4) + 1j * gen.standard_normal(4)
    m = np.outer(x, y)
    w, z = dominant_rank1(m)
    assert np.linalg.norm(np.outer(w, z) - m) < 1e-12


def test_truncated_svd():
    gen = rng(3)
    m = gen.standard_normal((6, 5))
    b, c = truncated_svd(m, 2)
    assert b.shape == (6, 2) and c.shape == (5, 2)
    assert numerical_rank(b @ c.T) == 2


def test_cond():
    assert cond(np.eye(4)) == pytest.approx(1.0)
    assert np.isinf(cond(np.zeros((3, 3))))
