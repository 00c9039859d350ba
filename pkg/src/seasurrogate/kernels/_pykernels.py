"""Reference numpy implementation of the hot loops.

Shapes follow one convention throughout: time-major ``(T, B, ...)`` with
``B`` the batch of sequences.  ``xproj`` is the input projection plus bias,
already computed for every step; only the recurrent part lives here.

Gate layouts along the last axis:

* LSTM: ``[forget, input, output, candidate]``, each ``H`` wide
* GRU: ``[reset, update, candidate]``
* vanilla: ``[hidden]``
"""

import numpy as np

NAME = "python"


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def lstm_forward(xproj, wh, h0, c0):
    T, B, G = xproj.shape
    H = G // 4
    hs = np.empty((T, B, H))
    cs = np.empty((T, B, H))
    gates = np.empty((T, B, G))
    h, c = h0, c0
    for t in range(T):
        a = xproj[t] + h @ wh.T
        g = gates[t]
        g[:, :3 * H] = _sigmoid(a[:, :3 * H])
        g[:, 3 * H:] = np.tanh(a[:, 3 * H:])
        c = g[:, :H] * c + g[:, H:2 * H] * g[:, 3 * H:]
        h = g[:, 2 * H:3 * H] * np.tanh(c)
        cs[t] = c
        hs[t] = h
    return hs, cs, gates


def lstm_backward(dhs, gates, hs, cs, h0, c0, wh, dh_last=None, dc_last=None):
    T, B, H = dhs.shape
    dxproj = np.empty_like(gates)
    dwh = np.zeros_like(wh)
    dh_next = np.zeros((B, H)) if dh_last is None else dh_last.copy()
    dc_next = np.zeros((B, H)) if dc_last is None else dc_last.copy()
    for t in range(T - 1, -1, -1):
        g = gates[t]
        f, i, o, cand = g[:, :H], g[:, H:2 * H], g[:, 2 * H:3 * H], g[:, 3 * H:]
        c_prev = cs[t - 1] if t > 0 else c0
        h_prev = hs[t - 1] if t > 0 else h0
        dh = dhs[t] + dh_next
        tc = np.tanh(cs[t])
        dc = dc_next + dh * o * (1.0 - tc * tc)
        da = dxproj[t]
        da[:, :H] = dc * c_prev * f * (1.0 - f)
        da[:, H:2 * H] = dc * cand * i * (1.0 - i)
        da[:, 2 * H:3 * H] = dh * tc * o * (1.0 - o)
        da[:, 3 * H:] = dc * i * (1.0 - cand * cand)
        dwh += da.T @ h_prev
        dh_next = da @ wh
        dc_next = dc * f
    return dxproj, dwh, dh_next, dc_next


def gru_forward(xproj, wh, h0):
    T, B, G = xproj.shape
    H = G // 3
    hs = np.empty((T, B, H))
    gates = np.empty((T, B, 4 * H))  # r, z, n, recurrent candidate term
    h = h0
    for t in range(T):
        hp = h @ wh.T
        x = xproj[t]
        g = gates[t]
        g[:, :2 * H] = _sigmoid(x[:, :2 * H] + hp[:, :2 * H])
        g[:, 3 * H:] = hp[:, 2 * H:]
        g[:, 2 * H:3 * H] = np.tanh(x[:, 2 * H:] + g[:, :H] * hp[:, 2 * H:])
        z, n = g[:, H:2 * H], g[:, 2 * H:3 * H]
        h = (1.0 - z) * n + z * h
        hs[t] = h
    return hs, gates


def gru_backward(dhs, gates, hs, h0, wh, dh_last=None):
    T, B, H = dhs.shape
    dxproj = np.empty((T, B, 3 * H))
    dwh = np.zeros_like(wh)
    dh_next = np.zeros((B, H)) if dh_last is None else dh_last.copy()
    dhp = np.empty((B, 3 * H))
    for t in range(T - 1, -1, -1):
        g = gates[t]
        r, z, n, hn = g[:, :H], g[:, H:2 * H], g[:, 2 * H:3 * H], g[:, 3 * H:]
        h_prev = hs[t - 1] if t > 0 else h0
        dh = dhs[t] + dh_next
        dn = dh * (1.0 - z) * (1.0 - n * n)
        dr = dn * hn * r * (1.0 - r)
        dz = dh * (h_prev - n) * z * (1.0 - z)
        dx = dxproj[t]
        dx[:, :H] = dr
        dx[:, H:2 * H] = dz
        dx[:, 2 * H:] = dn
        dhp[:, :H] = dr
        dhp[:, H:2 * H] = dz
        dhp[:, 2 * H:] = dn * r
        dwh += dhp.T @ h_prev
        dh_next = dh * z + dhp @ wh
    return dxproj, dwh, dh_next


def rnn_forward(xproj, wh, h0):
    T, B, H = xproj.shape
    hs = np.empty((T, B, H))
    h = h0
    for t in range(T):
        h = np.tanh(xproj[t] + h @ wh.T)
        hs[t] = h
    return hs


def rnn_backward(dhs, hs, h0, wh, dh_last=None):
    T, B, H = dhs.shape
    dxproj = np.empty((T, B, H))
    dwh = np.zeros_like(wh)
    dh_next = np.zeros((B, H)) if dh_last is None else dh_last.copy()
    for t in range(T - 1, -1, -1):
        h_prev = hs[t - 1] if t > 0 else h0
        da = (dhs[t] + dh_next) * (1.0 - hs[t] * hs[t])
        dxproj[t] = da
        dwh += da.T @ h_prev
        dh_next = da @ wh
    return dxproj, dwh, dh_next


def _accel(q, f, mass, damp, quad, stiff, cubic, coupling, active):
    x, v = q[:3], q[3:]
    restoring = stiff * x * (1.0 + cubic * x * x)
    restoring[0] += coupling * x[1]
    restoring[1] += coupling * x[0]
    a = (f - damp * v - quad * v * np.abs(v) - restoring) / mass
    return np.concatenate([v, a]) * np.concatenate([active, active])


def rk4_oscillator(forcing, dt, mass, damp, quad, stiff, cubic, coupling, active, state0):
    """Fixed-step RK4 on the half-step forcing grid; returns ``(states, fail_step)``."""
    steps = (forcing.shape[0] + 1) // 2
    out = np.empty((steps, 6))
    q = state0.astype(float).copy()
    out[0] = q
    args = (mass, damp, quad, stiff, cubic, coupling, active)
    for n in range(steps - 1):
        f0, fh, f1 = forcing[2 * n], forcing[2 * n + 1], forcing[2 * n + 2]
        k1 = _accel(q, f0, *args)
        k2 = _accel(q + 0.5 * dt * k1, fh, *args)
        k3 = _accel(q + 0.5 * dt * k2, fh, *args)
        k4 = _accel(q + dt * k3, f1, *args)
        q = q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(q)):
            return out[:n + 1], n + 1
        out[n + 1] = q
    return out, -1
