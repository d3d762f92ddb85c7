# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: cyclic Jacobi for Hermitian matrices and the
deterministic-strategy odometer behind the LHV constants.

The pure-Python twins live in ``_pykernels``; both must return identical
values up to rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def jacobi_eigh(ar_in, ai_in, double tol, int max_sweeps):
    """Diagonalize the Hermitian matrix ``ar_in + 1j*ai_in`` (inputs are not modified).

    Returns ``(eigenvalues, vr, vi, sweeps)`` with unsorted eigenvalues and the
    eigenvector columns split into real and imaginary parts.
    """
    cdef double[:, ::1] ar = np.array(ar_in, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] ai = np.array(ai_in, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = ar.shape[0]
    cdef Py_ssize_t p, q, k
    cdef int sweep = 0
    cdef double off, fro, gr, gi, absg, pr, pim, theta, t, c, s
    cdef double xr, xi, yr, yi, ur, ui, wr, wi
    vr_arr = np.eye(n, dtype=np.float64)
    vi_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] vr = vr_arr
    cdef double[:, ::1] vi = vi_arr

    fro = 0.0
    for p in range(n):
        for q in range(n):
            fro += ar[p, q] * ar[p, q] + ai[p, q] * ai[p, q]
    fro = sqrt(fro)

    with nogil:
        while sweep < max_sweeps:
            off = 0.0
            for p in range(n):
                for q in range(p + 1, n):
                    off += ar[p, q] * ar[p, q] + ai[p, q] * ai[p, q]
            if sqrt(2.0 * off) <= tol * fro or off == 0.0:
                break
            sweep += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    gr = ar[p, q]
                    gi = ai[p, q]
                    absg = sqrt(gr * gr + gi * gi)
                    if absg == 0.0 or absg < 1e-300:
                        continue
                    pr = gr / absg
                    pim = gi / absg
                    theta = (ar[q, q] - ar[p, p]) / (2.0 * absg)
                    if theta >= 0.0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    # columns: A <- A J
                    for k in range(n):
                        xr = ar[k, p]; xi = ai[k, p]
                        yr = ar[k, q]; yi = ai[k, q]
                        # conj(phase) * y
                        ur = pr * yr + pim * yi
                        ui = pr * yi - pim * yr
                        # phase * x
                        wr = pr * xr - pim * xi
                        wi = pr * xi + pim * xr
                        ar[k, p] = c * xr - s * ur
                        ai[k, p] = c * xi - s * ui
                        ar[k, q] = s * wr + c * yr
                        ai[k, q] = s * wi + c * yi
                        xr = vr[k, p]; xi = vi[k, p]
                        yr = vr[k, q]; yi = vi[k, q]
                        ur = pr * yr + pim * yi
                        ui = pr * yi - pim * yr
                        wr = pr * xr - pim * xi
                        wi = pr * xi + pim * xr
                        vr[k, p] = c * xr - s * ur
                        vi[k, p] = c * xi - s * ui
                        vr[k, q] = s * wr + c * yr
                        vi[k, q] = s * wi + c * yi
                    # rows: A <- J^H A
                    for k in range(n):
                        xr = ar[p, k]; xi = ai[p, k]
                        yr = ar[q, k]; yi = ai[q, k]
                        # phase * y
                        ur = pr * yr - pim * yi
                        ui = pr * yi + pim * yr
                        # conj(phase) * x
                        wr = pr * xr + pim * xi
                        wi = pr * xi - pim * xr
                        ar[p, k] = c * xr - s * ur
                        ai[p, k] = c * xi - s * ui
                        ar[q, k] = s * wr + c * yr
                        ai[q, k] = s * wi + c * yi
                    ar[p, q] = 0.0; ai[p, q] = 0.0
                    ar[q, p] = 0.0; ai[q, p] = 0.0
                    ai[p, p] = 0.0; ai[q, q] = 0.0

    w = np.empty(n, dtype=np.float64)
    for p in range(n):
        w[p] = ar[p, p]
    return w, vr_arr, vi_arr, sweep


def lhv_extrema(const double[::1] coeffs, const long[::1] settings, const long[::1] outcomes):
    """Exact sup/inf of a Bell functional over deterministic strategies.

    ``coeffs`` is the C-ordered table with axes (s_1..s_N, l_1..l_N).  The
    first N-1 parties are enumerated by a mixed-radix odometer; the last
    party's choice separates per setting and is maximized directly.

    Returns ``(sup, inf, sup_digits, inf_digits)`` where the digit arrays hold
    the outcome chosen by each (party, setting), parties in order.
    """
    cdef Py_ssize_t N = settings.shape[0]
    cdef Py_ssize_t n, m, t, sl, ll, i
    cdef Py_ssize_t last = N - 1
    strides_arr = np.empty(2 * N, dtype=np.int64)
    cdef long[::1] strides = strides_arr
    cdef long acc = 1
    for n in range(N - 1, -1, -1):
        strides[N + n] = acc
        acc *= outcomes[n]
    for n in range(N - 1, -1, -1):
        strides[n] = acc
        acc *= settings[n]

    # prefix setting tuples (parties 0..N-2)
    cdef long T = 1
    for n in range(last):
        T *= settings[n]
    tset_arr = np.zeros((T, max(last, 1)), dtype=np.int64)
    base_arr = np.zeros(T, dtype=np.int64)
    cdef long[:, ::1] tset = tset_arr
    cdef long[::1] base = base_arr
    cdef long rem
    for t in range(T):
        rem = t
        for n in range(last - 1, -1, -1):
            tset[t, n] = rem % settings[n]
            rem //= settings[n]
        for n in range(last):
            base[t] += tset[t, n] * strides[n]

    # digit layout: offset of (party n, setting 0) in the flat digit array
    doff_arr = np.zeros(N + 1, dtype=np.int64)
    cdef long[::1] doff = doff_arr
    for n in range(N):
        doff[n + 1] = doff[n] + settings[n]
    cdef long L = doff[last]
    digits_arr = np.zeros(max(L, 1), dtype=np.int64)
    cdef long[::1] digits = digits_arr
    best_hi_arr = np.zeros(doff[N], dtype=np.int64)
    best_lo_arr = np.zeros(doff[N], dtype=np.int64)
    cdef long[::1] best_hi = best_hi_arr
    cdef long[::1] best_lo = best_lo_arr
    off_arr = np.zeros(T, dtype=np.int64)
    cdef long[::1] off = off_arr
    cdef long SN = settings[last]
    cdef long dN = outcomes[last]
    g_arr = np.zeros(dN, dtype=np.float64)
    arg_hi_arr = np.zeros(SN, dtype=np.int64)
    arg_lo_arr = np.zeros(SN, dtype=np.int64)
    cdef double[::1] g = g_arr
    cdef long[::1] arg_hi = arg_hi_arr
    cdef long[::1] arg_lo = arg_lo_arr

    cdef double hi = -1e308
    cdef double lo = 1e308
    cdef double vhi, vlo, gmax, gmin, acc_v
    cdef long imax, imin, o, pos
    cdef bint first = True
    cdef bint done = False

    with nogil:
        while not done:
            for t in range(T):
                o = base[t]
                for n in range(last):
                    o += digits[doff[n] + tset[t, n]] * strides[N + n]
                off[t] = o
            vhi = 0.0
            vlo = 0.0
            for sl in range(SN):
                for ll in range(dN):
                    acc_v = 0.0
                    o = sl * strides[last] + ll * strides[N + last]
                    for t in range(T):
                        acc_v += coeffs[off[t] + o]
                    g[ll] = acc_v
                gmax = g[0]; gmin = g[0]; imax = 0; imin = 0
                for ll in range(1, dN):
                    if g[ll] > gmax:
                        gmax = g[ll]; imax = ll
                    if g[ll] < gmin:
                        gmin = g[ll]; imin = ll
                vhi += gmax
                vlo += gmin
                arg_hi[sl] = imax
                arg_lo[sl] = imin
            if first or vhi > hi:
                hi = vhi
                for i in range(L):
                    best_hi[i] = digits[i]
                for sl in range(SN):
                    best_hi[L + sl] = arg_hi[sl]
            if first or vlo < lo:
                lo = vlo
                for i in range(L):
                    best_lo[i] = digits[i]
                for sl in range(SN):
                    best_lo[L + sl] = arg_lo[sl]
            first = False
            # advance odometer, last digit fastest
            pos = L - 1
            while pos >= 0:
                n = 0
                while doff[n + 1] <= pos:
                    n += 1
                digits[pos] += 1
                if digits[pos] < outcomes[n]:
                    break
                digits[pos] = 0
                pos -= 1
            if pos < 0:
                done = True

    return hi, lo, best_hi_arr, best_lo_arr
