"""Pure numpy fallback for the compiled kernels in ``_ckernels``.

Same signatures and return conventions; selected at import when the
extension is missing or ``BELLBOUND_PURE=1`` is set.
"""

import numpy as np

_CHUNK = 1 << 15


def jacobi_eigh(ar, ai, tol, max_sweeps):
    a = np.asarray(ar) + 1j * np.asarray(ai)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    fro = np.linalg.norm(a)
    iu = np.triu_indices(n, 1)
    sweep = 0
    while sweep < max_sweeps:
        off = np.sum(np.abs(a[iu]) ** 2)
        if off == 0.0 or np.sqrt(2.0 * off) <= tol * fro:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[p, q]
                absg = abs(g)
                if absg < 1e-300:
                    continue
                phase = g / absg
                theta = (a[q, q].real - a[p, p].real) / (2.0 * absg)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                x = a[:, p].copy()
                y = a[:, q]
                a[:, p] = c * x - s * np.conj(phase) * y
                a[:, q] = s * phase * x + c * y
                x = v[:, p].copy()
                y = v[:, q]
                v[:, p] = c * x - s * np.conj(phase) * y
                v[:, q] = s * phase * x + c * y
                x = a[p, :].copy()
                y = a[q, :]
                a[p, :] = c * x - s * phase * y
                a[q, :] = s * np.conj(phase) * x + c * y
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    w = np.real(np.diag(a)).copy()
    return w, np.ascontiguousarray(v.real), np.ascontiguousarray(v.imag), sweep


def lhv_extrema(coeffs, settings, outcomes):
    settings = [int(s) for s in settings]
    outcomes = [int(d) for d in outcomes]
    N = len(settings)
    last = N - 1
    f = np.asarray(coeffs, dtype=float).reshape(settings + outcomes)
    # axes -> (s_0..s_{N-2}, l_0..l_{N-2}, s_last, l_last)
    order = list(range(last)) + [N + n for n in range(last)] + [last, N + last]
    f = f.transpose(order)
    T = int(np.prod(settings[:last], dtype=np.int64))
    D = int(np.prod(outcomes[:last], dtype=np.int64))
    f = f.reshape(T, D, settings[last], outcomes[last])

    tset = np.array(list(np.ndindex(*settings[:last])) or [()], dtype=np.int64)
    tset = tset.reshape(T, last)
    doff = np.concatenate([[0], np.cumsum(settings)])
    L = int(doff[last])
    radices = np.array([outcomes[n] for n in range(last) for _ in range(settings[n])], dtype=np.int64)
    total = int(np.prod(radices, dtype=np.int64)) if L else 1
    # mixed-radix place values of digits, last digit fastest
    place = np.ones(L, dtype=np.int64)
    for i in range(L - 2, -1, -1):
        place[i] = place[i + 1] * radices[i + 1]
    # outcome place values in the flattened prefix outcome index
    oplace = np.ones(last, dtype=np.int64)
    for n in range(last - 2, -1, -1):
        oplace[n] = oplace[n + 1] * outcomes[n + 1]
    # digit column used by prefix setting tuple t for party n
    cols = np.array([[doff[n] + tset[t, n] for n in range(last)] for t in range(T)], dtype=np.int64)
    cols = cols.reshape(T, last)
    tidx = np.arange(T)

    hi = lo = None
    best_hi = best_lo = None
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // place[None, :]) % radices[None, :] if L else np.zeros((len(idx), 0), np.int64)
        if last:
            outidx = (digits[:, cols] * oplace[None, None, :]).sum(axis=2)
        else:
            outidx = np.zeros((len(idx), T), dtype=np.int64)
        g = f[tidx[None, :], outidx].sum(axis=1)  # (chunk, S_last, d_last)
        gmax = g.max(axis=2)
        gmin = g.min(axis=2)
        vhi = gmax.sum(axis=1)
        vlo = gmin.sum(axis=1)
        i = int(np.argmax(vhi))
        if hi is None or vhi[i] > hi:
            hi = float(vhi[i])
            best_hi = np.concatenate([digits[i], np.argmax(g[i], axis=1)])
        i = int(np.argmin(vlo))
        if lo is None or vlo[i] < lo:
            lo = float(vlo[i])
            best_lo = np.concatenate([digits[i], np.argmin(g[i], axis=1)])
    return hi, lo, best_hi.astype(np.int64), best_lo.astype(np.int64)
