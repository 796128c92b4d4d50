"""Cross-checks between the numba kernels and the pure-numpy fallbacks."""

import numpy as np
import pytest

from btd1 import _kernels
from btd1.gf import GFField
from btd1.linalg import rng
from btd1.minors import strict_pairs, sym_pairs


@pytest.mark.parametrize("dtype", [np.float64, np.complex128, np.int64])
def test_minor_fill_paths_agree(dtype):
    gen = rng(0)
    if dtype == np.int64:
        t = gen.integers(-4, 5, size=(3, 4, 5)).astype(np.int64)
    elif dtype == np.complex128:
        t = (gen.standard_normal((3, 4, 5)) + 1j * gen.standard_normal((3, 4, 5)))
    else:
        t = gen.standard_normal((3, 4, 5))
    ip1, ip2 = strict_pairs(3)
    jp1, jp2 = strict_pairs(4)
    kp1, kp2 = sym_pairs(5)
    out_a = np.empty((ip1.size * jp1.size, kp1.size), dtype=dtype)
    out_b = np.empty_like(out_a)
    _kernels.minor_matrix_fill_numpy(t, ip1, ip2, jp1, jp2, kp1, kp2, out_a)
    _kernels.minor_matrix_fill(t, ip1, ip2, jp1, jp2, kp1, kp2, out_b)
    if dtype == np.int64:
        assert np.array_equal(out_a, out_b)
    else:
        # complex products may round differently between the two paths
        assert np.allclose(out_a, out_b, atol=1e-13, rtol=1e-13)


def test_gf2k_elimination_paths_agree():
    f = GFField()
    gen = rng(1)
    for shape in ((10, 14), (20, 20), (15, 8)):
        mat = f.random(gen, shape)
        mat[:, -1] = mat[:, 0]  # plant a dependency
        r_np = _kernels.gf2k_eliminate_numpy(mat.copy(), f.log, f.exp, f.order)
        r_nb = _kernels.gf2k_eliminate(mat.copy(), f.log, f.exp, f.order)
        assert r_np == r_nb


def test_gfp_elimination_paths_agree():
    p = 101
    gen = rng(2)
    for shape in ((8, 8), (12, 7), (6, 10)):
        mat = gen.integers(0, p, size=shape)
        r_np = _kernels.gfp_eliminate_numpy(mat.copy(), p)
        r_nb = _kernels.gfp_eliminate(mat.copy(), p)
        assert r_np == r_nb


def test_env_flag_selects_numpy_fallback():
    import subprocess
    import sys

    code = (
        "import os; os.environ['BTD_NO_NUMBA'] = '1';"
        "from btd1 import _kernels;"
        "assert not _kernels.NUMBA_ENABLED;"
        "assert _kernels.minor_matrix_fill is _kernels.minor_matrix_fill_numpy;"
        "from btd1.minors import build_Q2;"
        "from btd1 import compose, random_btd;"
        "import numpy as np;"
        "q2 = build_Q2(compose(random_btd((3, 4, 5), (2, 2), seed=0))).Q2;"
        "print(q2.shape)"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert "(18, 15)" in out.stdout
