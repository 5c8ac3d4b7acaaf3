"""Parity between the numba fast path and the pure-numpy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from schouten import _kernels


requires_numba = pytest.mark.skipif(
    _kernels.IMPLEMENTATIONS["numba"] is None, reason="numba not available")


@requires_numba
def test_elementary_symmetric_parity(rng):
    lam = rng.standard_normal((300, 6))
    a = _kernels.IMPLEMENTATIONS["numpy"]["elementary_symmetric"](lam, 6)
    b = _kernels.IMPLEMENTATIONS["numba"]["elementary_symmetric"](lam, 6)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13)


@requires_numba
def test_membership_parity(rng):
    lam = rng.standard_normal((500, 5))
    a = _kernels.IMPLEMENTATIONS["numpy"]["gamma_member"](lam, 3)
    b = _kernels.IMPLEMENTATIONS["numba"]["gamma_member"](lam, 3)
    assert np.array_equal(a, b)


@requires_numba
def test_margin_parity(rng):
    lam = rng.standard_normal((400, 4)) * np.exp(rng.uniform(-6, 6, (400, 1)))
    a = _kernels.IMPLEMENTATIONS["numpy"]["gamma_margin"](lam, 2)
    b = _kernels.IMPLEMENTATIONS["numba"]["gamma_margin"](lam, 2)
    scale = np.abs(lam).max(axis=1)
    assert np.allclose(a, b, atol=1e-11 * scale.max(), rtol=1e-10)


@requires_numba
def test_radial_eigs_parity(rng):
    m = 200
    u = rng.uniform(0.5, 2.0, m)
    up = rng.standard_normal(m)
    upp = rng.standard_normal(m)
    cot = rng.standard_normal(m)
    pole = np.zeros(m, dtype=bool)
    pole[[0, -1]] = True
    a = _kernels.IMPLEMENTATIONS["numpy"]["radial_sphere_eigs"](u, up, upp, cot, pole, 4)
    b = _kernels.IMPLEMENTATIONS["numba"]["radial_sphere_eigs"](u, up, upp, cot, pole, 4)
    assert np.allclose(a[0], b[0], rtol=1e-13)
    assert np.allclose(a[1], b[1], rtol=1e-13)


def test_env_flag_forces_numpy_backend():
    env = dict(os.environ, SCHOUTEN_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from schouten import _kernels; print(_kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "numpy"


def test_margin_zero_vector_is_boundary():
    lam = np.zeros((1, 4))
    assert _kernels.gamma_margin(lam, 2)[0] == 0.0


def test_margin_scale_invariance_small_vectors():
    lam = np.array([[3.0, 1.0, 1.0]])
    base = _kernels.gamma_margin(lam, 1)[0]
    tiny = _kernels.gamma_margin(1e-9 * lam, 1)[0]
    assert tiny == pytest.approx(1e-9 * base, rel=1e-9)
