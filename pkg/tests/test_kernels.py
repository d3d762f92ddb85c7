import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from bellbound import _pykernels, kernels
from bellbound.tensor import make_rng

try:
    from bellbound import _ckernels
except ImportError:  # extension not built in this environment
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python")]
BACKENDS.append(pytest.param(_ckernels, id="cython", marks=pytest.mark.skipif(_ckernels is None, reason="extension not built")))


def _hermitian(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return g + g.conj().T


def _eig(mod, a):
    ar = np.ascontiguousarray(a.real)
    ai = np.ascontiguousarray(a.imag)
    w, vr, vi, sweeps = mod.jacobi_eigh(ar, ai, 1e-15, 100)
    return np.asarray(w), np.asarray(vr) + 1j * np.asarray(vi), sweeps


def _brute_extrema(coeffs, settings_, outcomes):
    """Direct enumeration over every deterministic strategy."""
    N = len(settings_)
    tables = [list(itertools.product(range(outcomes[n]), repeat=settings_[n])) for n in range(N)]
    best, worst = -np.inf, np.inf
    for strat in itertools.product(*tables):
        total = 0.0
        for s in itertools.product(*(range(k) for k in settings_)):
            total += coeffs[s + tuple(strat[n][s[n]] for n in range(N))]
        best, worst = max(best, total), min(worst, total)
    return best, worst


def _call_lhv(mod, coeffs):
    N = coeffs.ndim // 2
    settings_ = np.array(coeffs.shape[:N], dtype=np.int_)
    outcomes = np.array(coeffs.shape[N:], dtype=np.int_)
    flat = np.ascontiguousarray(coeffs, dtype=np.float64).ravel()
    return mod.lhv_extrema(flat, settings_, outcomes)


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_env_forces_fallback():
    env = dict(os.environ, BELLBOUND_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from bellbound import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("mod", BACKENDS)
@pytest.mark.parametrize("n", [1, 2, 5, 16, 33])
def test_jacobi_reconstructs(mod, n):
    a = _hermitian(make_rng(n), n)
    w, v, sweeps = _eig(mod, a)
    assert sweeps <= 100
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - a)) <= 1e-11 * np.linalg.norm(a)
    assert np.max(np.abs(v.conj().T @ v - np.eye(n))) <= 1e-12
    assert_allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-11 * np.linalg.norm(a))


@pytest.mark.parametrize("mod", BACKENDS)
def test_jacobi_real_symmetric(mod):
    a = np.array([[2.0, 1.0], [1.0, 2.0]], dtype=complex)
    w, _, _ = _eig(mod, a)
    assert_allclose(np.sort(w), [1, 3], atol=1e-15)


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_backends_agree_on_spectrum(seed, n):
    a = _hermitian(make_rng(seed), n)
    wc = np.sort(_eig(_ckernels, a)[0])
    wp = np.sort(_eig(_pykernels, a)[0])
    assert_allclose(wc, wp, atol=1e-11 * np.linalg.norm(a))


@pytest.mark.parametrize("mod", BACKENDS)
@pytest.mark.parametrize("shape", [(2, 2, 2, 2), (1, 3, 2, 2), (2, 3, 3, 2), (2, 2, 2, 2, 2, 2), (3, 1, 2, 2, 3, 2)])
def test_lhv_extrema_match_brute_force(mod, shape):
    coeffs = make_rng(sum(shape)).standard_normal(shape)
    N = len(shape) // 2
    sup, inf, dsup, dinf = _call_lhv(mod, coeffs)
    bsup, binf = _brute_extrema(coeffs, shape[:N], shape[N:])
    assert_allclose([sup, inf], [bsup, binf], rtol=1e-13, atol=1e-13)
    assert len(np.asarray(dsup)) == sum(shape[:N])
    assert len(np.asarray(dinf)) == sum(shape[:N])


@pytest.mark.parametrize("mod", BACKENDS)
def test_lhv_digits_attain_the_extrema(mod):
    shape = (2, 3, 2, 2, 3, 2)
    coeffs = make_rng(11).standard_normal(shape)
    N = 3
    sup, inf, dsup, dinf = _call_lhv(mod, coeffs)
    for value, digits in ((sup, dsup), (inf, dinf)):
        digits = list(np.asarray(digits))
        offs = np.cumsum((0,) + shape[:N])
        total = sum(coeffs[s + tuple(digits[offs[n] + s[n]] for n in range(N))]
                    for s in itertools.product(*(range(k) for k in shape[:N])))
        assert_allclose(total, value, rtol=1e-13)


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.integers(1, 3), min_size=4, max_size=6).filter(lambda x: len(x) % 2 == 0))
def test_backends_agree_on_lhv(seed, dims):
    N = len(dims) // 2
    shape = tuple(dims[:N]) + tuple(max(2, x) for x in dims[N:])
    coeffs = make_rng(seed).standard_normal(shape)
    c = _call_lhv(_ckernels, coeffs)
    p = _call_lhv(_pykernels, coeffs)
    assert_allclose(c[:2], p[:2], rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("mod", BACKENDS)
def test_kernels_leave_inputs_untouched(mod):
    a = _hermitian(make_rng(3), 6)
    ar, ai = np.ascontiguousarray(a.real), np.ascontiguousarray(a.imag)
    ar0, ai0 = ar.copy(), ai.copy()
    mod.jacobi_eigh(ar, ai, 1e-15, 100)
    assert np.array_equal(ar, ar0) and np.array_equal(ai, ai0)
    coeffs = make_rng(4).standard_normal((2, 2, 3, 3))
    flat = coeffs.ravel().copy()
    _call_lhv(mod, coeffs)
    assert np.array_equal(coeffs.ravel(), flat)
