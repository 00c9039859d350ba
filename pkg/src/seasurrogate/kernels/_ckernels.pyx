# cython: language_level=3
"""Compiled recurrent and RK4 kernels; same contract as ``_pykernels``.

Matrix products go through the BLAS bundled with scipy.  Arrays are
row-major, so every product is issued as its transpose in column-major
terms.  All loops run without the GIL.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, fabs, isfinite
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

NAME = "cython"


cdef inline double _sig(double x) noexcept nogil:
    return 0.5 * (1.0 + tanh(0.5 * x))


cdef inline void _acc_xwt(double *out, const double *a, const double *w,
                          int rows, int inner, int cols, double beta) noexcept nogil:
    # out(rows, cols) = beta*out + a(rows, inner) @ w(cols, inner).T
    cdef char tr = b'T'
    cdef char nt = b'N'
    cdef double one = 1.0
    dgemm(&tr, &nt, &cols, &rows, &inner, &one, <double *>w, &inner,
          <double *>a, &inner, &beta, out, &cols)


cdef inline void _acc_xw(double *out, const double *a, const double *w,
                         int rows, int inner, int cols, double beta) noexcept nogil:
    # out(rows, cols) = beta*out + a(rows, inner) @ w(inner, cols)
    cdef char nt = b'N'
    cdef double one = 1.0
    dgemm(&nt, &nt, &cols, &rows, &inner, &one, <double *>w, &cols,
          <double *>a, &inner, &beta, out, &cols)


cdef inline void _acc_xtw(double *out, const double *a, const double *b,
                          int inner, int rows, int cols) noexcept nogil:
    # out(rows, cols) += a(inner, rows).T @ b(inner, cols)
    cdef char nt = b'N'
    cdef char tr = b'T'
    cdef double one = 1.0
    dgemm(&nt, &tr, &cols, &rows, &inner, &one, <double *>b, &cols,
          <double *>a, &rows, &one, out, &cols)


def lstm_forward(const double[:, :, ::1] xproj, const double[:, ::1] wh,
                 const double[:, ::1] h0, const double[:, ::1] c0):
    cdef int T = xproj.shape[0], B = xproj.shape[1], G = xproj.shape[2]
    cdef int H = G // 4
    hs_a = np.empty((T, B, H))
    cs_a = np.empty((T, B, H))
    gates_a = np.asarray(xproj).copy()
    cdef double[:, :, ::1] hs = hs_a
    cdef double[:, :, ::1] cs = cs_a
    cdef double[:, :, ::1] gates = gates_a
    cdef int t, b, j
    cdef const double *hprev
    cdef const double *cprev
    cdef double *g
    cdef double c
    with nogil:
        for t in range(T):
            hprev = &h0[0, 0] if t == 0 else &hs[t - 1, 0, 0]
            cprev = &c0[0, 0] if t == 0 else &cs[t - 1, 0, 0]
            if H > 0 and B > 0:
                _acc_xwt(&gates[t, 0, 0], hprev, &wh[0, 0], B, H, G, 1.0)
            for b in range(B):
                g = &gates[t, b, 0]
                for j in range(3 * H):
                    g[j] = _sig(g[j])
                for j in range(3 * H, G):
                    g[j] = tanh(g[j])
                for j in range(H):
                    c = g[j] * cprev[b * H + j] + g[H + j] * g[3 * H + j]
                    cs[t, b, j] = c
                    hs[t, b, j] = g[2 * H + j] * tanh(c)
    return hs_a, cs_a, gates_a


def lstm_backward(const double[:, :, ::1] dhs, const double[:, :, ::1] gates,
                  const double[:, :, ::1] hs, const double[:, :, ::1] cs,
                  const double[:, ::1] h0, const double[:, ::1] c0,
                  const double[:, ::1] wh, dh_last=None, dc_last=None):
    cdef int T = dhs.shape[0], B = dhs.shape[1], H = dhs.shape[2]
    cdef int G = 4 * H
    dx_a = np.empty((T, B, G))
    dwh_a = np.zeros((G, H))
    dhn_a = np.zeros((B, H)) if dh_last is None else np.array(dh_last, dtype=np.float64, order="C")
    dcn_a = np.zeros((B, H)) if dc_last is None else np.array(dc_last, dtype=np.float64, order="C")
    dh_a = np.empty((B, H))
    cdef double[:, :, ::1] dx = dx_a
    cdef double[:, ::1] dwh = dwh_a
    cdef double[:, ::1] dh_next = dhn_a
    cdef double[:, ::1] dc_next = dcn_a
    cdef double[:, ::1] dh = dh_a
    cdef int t, b, j
    cdef const double *g
    cdef const double *hprev
    cdef const double *cprev
    cdef double *da
    cdef double f, i, o, cand, tc, dcv, dhv
    with nogil:
        for t in range(T - 1, -1, -1):
            hprev = &h0[0, 0] if t == 0 else &hs[t - 1, 0, 0]
            cprev = &c0[0, 0] if t == 0 else &cs[t - 1, 0, 0]
            for b in range(B):
                g = &gates[t, b, 0]
                da = &dx[t, b, 0]
                for j in range(H):
                    f = g[j]
                    i = g[H + j]
                    o = g[2 * H + j]
                    cand = g[3 * H + j]
                    dhv = dhs[t, b, j] + dh_next[b, j]
                    tc = tanh(cs[t, b, j])
                    dcv = dc_next[b, j] + dhv * o * (1.0 - tc * tc)
                    da[j] = dcv * cprev[b * H + j] * f * (1.0 - f)
                    da[H + j] = dcv * cand * i * (1.0 - i)
                    da[2 * H + j] = dhv * tc * o * (1.0 - o)
                    da[3 * H + j] = dcv * i * (1.0 - cand * cand)
                    dc_next[b, j] = dcv * f
            if H > 0 and B > 0:
                _acc_xtw(&dwh[0, 0], &dx[t, 0, 0], hprev, B, G, H)
                _acc_xw(&dh[0, 0], &dx[t, 0, 0], &wh[0, 0], B, G, H, 0.0)
            for b in range(B):
                for j in range(H):
                    dh_next[b, j] = dh[b, j]
    return dx_a, dwh_a, dhn_a, dcn_a


def gru_forward(const double[:, :, ::1] xproj, const double[:, ::1] wh,
                const double[:, ::1] h0):
    cdef int T = xproj.shape[0], B = xproj.shape[1], G = xproj.shape[2]
    cdef int H = G // 3
    hs_a = np.empty((T, B, H))
    gates_a = np.empty((T, B, 4 * H))
    hp_a = np.empty((B, G))
    cdef double[:, :, ::1] hs = hs_a
    cdef double[:, :, ::1] gates = gates_a
    cdef double[:, ::1] hp = hp_a
    cdef int t, b, j
    cdef const double *hprev
    cdef double *g
    cdef double z, n
    with nogil:
        for t in range(T):
            hprev = &h0[0, 0] if t == 0 else &hs[t - 1, 0, 0]
            if H > 0 and B > 0:
                _acc_xwt(&hp[0, 0], hprev, &wh[0, 0], B, H, G, 0.0)
            for b in range(B):
                g = &gates[t, b, 0]
                for j in range(2 * H):
                    g[j] = _sig(xproj[t, b, j] + hp[b, j])
                for j in range(H):
                    g[3 * H + j] = hp[b, 2 * H + j]
                    n = tanh(xproj[t, b, 2 * H + j] + g[j] * hp[b, 2 * H + j])
                    g[2 * H + j] = n
                    z = g[H + j]
                    hs[t, b, j] = (1.0 - z) * n + z * hprev[b * H + j]
    return hs_a, gates_a


def gru_backward(const double[:, :, ::1] dhs, const double[:, :, ::1] gates,
                 const double[:, :, ::1] hs, const double[:, ::1] h0,
                 const double[:, ::1] wh, dh_last=None):
    cdef int T = dhs.shape[0], B = dhs.shape[1], H = dhs.shape[2]
    cdef int G = 3 * H
    dx_a = np.empty((T, B, G))
    dwh_a = np.zeros((G, H))
    dhn_a = np.zeros((B, H)) if dh_last is None else np.array(dh_last, dtype=np.float64, order="C")
    dhp_a = np.empty((B, G))
    dh_a = np.empty((B, H))
    cdef double[:, :, ::1] dx = dx_a
    cdef double[:, ::1] dwh = dwh_a
    cdef double[:, ::1] dh_next = dhn_a
    cdef double[:, ::1] dhp = dhp_a
    cdef double[:, ::1] dh = dh_a
    cdef int t, b, j
    cdef const double *g
    cdef const double *hprev
    cdef double r, z, n, hn, dhv, dn, dr, dz
    with nogil:
        for t in range(T - 1, -1, -1):
            hprev = &h0[0, 0] if t == 0 else &hs[t - 1, 0, 0]
            for b in range(B):
                g = &gates[t, b, 0]
                for j in range(H):
                    r = g[j]
                    z = g[H + j]
                    n = g[2 * H + j]
                    hn = g[3 * H + j]
                    dhv = dhs[t, b, j] + dh_next[b, j]
                    dn = dhv * (1.0 - z) * (1.0 - n * n)
                    dr = dn * hn * r * (1.0 - r)
                    dz = dhv * (hprev[b * H + j] - n) * z * (1.0 - z)
                    dx[t, b, j] = dr
                    dx[t, b, H + j] = dz
                    dx[t, b, 2 * H + j] = dn
                    dhp[b, j] = dr
                    dhp[b, H + j] = dz
                    dhp[b, 2 * H + j] = dn * r
                    dh_next[b, j] = dhv * z
            if H > 0 and B > 0:
                _acc_xtw(&dwh[0, 0], &dhp[0, 0], hprev, B, G, H)
                _acc_xw(&dh_next[0, 0], &dhp[0, 0], &wh[0, 0], B, G, H, 1.0)
    return dx_a, dwh_a, dhn_a


def rnn_forward(const double[:, :, ::1] xproj, const double[:, ::1] wh,
                const double[:, ::1] h0):
    cdef int T = xproj.shape[0], B = xproj.shape[1], H = xproj.shape[2]
    hs_a = np.asarray(xproj).copy()
    cdef double[:, :, ::1] hs = hs_a
    cdef int t, b, j
    cdef const double *hprev
    with nogil:
        for t in range(T):
            hprev = &h0[0, 0] if t == 0 else &hs[t - 1, 0, 0]
            if H > 0 and B > 0:
                _acc_xwt(&hs[t, 0, 0], hprev, &wh[0, 0], B, H, H, 1.0)
            for b in range(B):
                for j in range(H):
                    hs[t, b, j] = tanh(hs[t, b, j])
    return hs_a


def rnn_backward(const double[:, :, ::1] dhs, const double[:, :, ::1] hs,
                 const double[:, ::1] h0, const double[:, ::1] wh, dh_last=None):
    cdef int T = dhs.shape[0], B = dhs.shape[1], H = dhs.shape[2]
    dx_a = np.empty((T, B, H))
    dwh_a = np.zeros((H, H))
    dhn_a = np.zeros((B, H)) if dh_last is None else np.array(dh_last, dtype=np.float64, order="C")
    cdef double[:, :, ::1] dx = dx_a
    cdef double[:, ::1] dwh = dwh_a
    cdef double[:, ::1] dh_next = dhn_a
    cdef int t, b, j
    cdef const double *hprev
    cdef double h
    with nogil:
        for t in range(T - 1, -1, -1):
            hprev = &h0[0, 0] if t == 0 else &hs[t - 1, 0, 0]
            for b in range(B):
                for j in range(H):
                    h = hs[t, b, j]
                    dx[t, b, j] = (dhs[t, b, j] + dh_next[b, j]) * (1.0 - h * h)
            if H > 0 and B > 0:
                _acc_xtw(&dwh[0, 0], &dx[t, 0, 0], hprev, B, H, H)
                _acc_xw(&dh_next[0, 0], &dx[t, 0, 0], &wh[0, 0], B, H, H, 0.0)
    return dx_a, dwh_a, dhn_a


cdef inline void _deriv(const double *q, const double *f, const double *mass,
                        const double *damp, const double *quad, const double *stiff,
                        const double *cubic, double coupling, const double *active,
                        double *out) noexcept nogil:
    cdef double r[3]
    cdef int d
    for d in range(3):
        r[d] = stiff[d] * q[d] * (1.0 + cubic[d] * q[d] * q[d])
    r[0] += coupling * q[1]
    r[1] += coupling * q[0]
    for d in range(3):
        out[d] = q[3 + d] * active[d]
        out[3 + d] = (f[d] - damp[d] * q[3 + d] - quad[d] * q[3 + d] * fabs(q[3 + d])
                      - r[d]) / mass[d] * active[d]


def rk4_oscillator(const double[:, ::1] forcing, double dt, const double[::1] mass,
                   const double[::1] damp, const double[::1] quad, const double[::1] stiff,
                   const double[::1] cubic, double coupling, const double[::1] active,
                   const double[::1] state0):
    cdef int steps = (forcing.shape[0] + 1) // 2
    out_a = np.empty((steps, 6))
    cdef double[:, ::1] out = out_a
    cdef double q[6]
    cdef double tmp[6]
    cdef double k1[6]
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef int n, d
    cdef int fail = -1
    cdef double h6 = dt / 6.0
    for d in range(6):
        q[d] = state0[d]
        out[0, d] = q[d]
    with nogil:
        for n in range(steps - 1):
            _deriv(q, &forcing[2 * n, 0], &mass[0], &damp[0], &quad[0], &stiff[0],
                   &cubic[0], coupling, &active[0], k1)
            for d in range(6):
                tmp[d] = q[d] + 0.5 * dt * k1[d]
            _deriv(tmp, &forcing[2 * n + 1, 0], &mass[0], &damp[0], &quad[0], &stiff[0],
                   &cubic[0], coupling, &active[0], k2)
            for d in range(6):
                tmp[d] = q[d] + 0.5 * dt * k2[d]
            _deriv(tmp, &forcing[2 * n + 1, 0], &mass[0], &damp[0], &quad[0], &stiff[0],
                   &cubic[0], coupling, &active[0], k3)
            for d in range(6):
                tmp[d] = q[d] + dt * k3[d]
            _deriv(tmp, &forcing[2 * n + 2, 0], &mass[0], &damp[0], &quad[0], &stiff[0],
                   &cubic[0], coupling, &active[0], k4)
            for d in range(6):
                q[d] = q[d] + h6 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d])
            for d in range(6):
                if not isfinite(q[d]):
                    fail = n + 1
                    break
            if fail >= 0:
                break
            for d in range(6):
                out[n + 1, d] = q[d]
    if fail >= 0:
        return out_a[:fail], fail
    return out_a, -1
