import os
import subprocess
import sys

import numpy as np
import pytest

from vpwave import kernels
from vpwave.specfun import KummerPolynomial

BACKENDS = kernels.available_backends()
needs_compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled core not built")


def test_backend_flag_matches_module():
    assert kernels.BACKEND in BACKENDS
    assert kernels.j0 is BACKENDS[kernels.BACKEND].j0


@needs_compiled
def test_j0_backends_agree():
    x = np.concatenate([np.linspace(-60, 60, 4001), [0.0, 25.0, np.nextafter(25.0, 30.0), 1e4]])
    a, b = BACKENDS["cython"].j0(x), BACKENDS["python"].j0(x)
    series = np.abs(x) <= 25.0
    assert np.array_equal(a[series], b[series])
    # libm and numpy cos/sin may differ in the last bit
    assert np.max(np.abs(a - b)) <= 1e-16


@needs_compiled
def test_poly_dd_backends_bitwise_identical():
    hi, lo = KummerPolynomial.of_order(17).split_coefficients
    x = np.linspace(0, 40, 997)
    assert np.array_equal(BACKENDS["cython"].poly_dd(hi, lo, x), BACKENDS["python"].poly_dd(hi, lo, x))


@needs_compiled
def test_shooting_backends_agree():
    lams = np.linspace(0.3, 7.7, 11)
    a = BACKENDS["cython"].shoot(lams, 0.5, 10.5, 1000)
    b = BACKENDS["python"].shoot(lams, 0.5, 10.5, 1000)
    assert np.allclose(a, b, rtol=1e-12, atol=0)
    pa, da = BACKENDS["cython"].frobenius_start(lams, 0.5)
    pb, db = BACKENDS["python"].frobenius_start(lams, 0.5)
    assert np.allclose(pa, pb, rtol=1e-14) and np.allclose(da, db, rtol=1e-14)


def test_frobenius_start_matches_eigenfunction(backend):
    # lam = 1 + 2m gives psi = exp(-x) L_m(2x); check m = 0 and m = 1
    psi, dpsi = kernels.frobenius_start(np.array([1.0, 3.0]), 0.7)
    e = np.exp(-0.7)
    assert psi == pytest.approx([e, e * (1 - 1.4)], rel=1e-14)
    assert dpsi == pytest.approx([-e, e * (-3 + 1.4)], rel=1e-13)


def test_pure_python_switch():
    env = dict(os.environ, VPWAVE_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import vpwave.kernels as k; print(k.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
