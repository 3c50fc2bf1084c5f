"""Compiled inner loop for pupil training.

Implements the same per-example updates as :mod:`ssilm.neuralnet`
(supervised step and 5-layer composite step, MSE or BCE loss) as numba
kernels so a full training schedule runs in one native call. All
randomness stays outside: the caller precomputes every input/target row
and passes dense float64 arrays. Equivalence with the numpy reference
is asserted in the test suite.

Loss codes: 0 = mse, 1 = bce.
"""

import numpy as np
from numba import njit

LOSS_CODES = {"mse": 0, "bce": 1}


@njit(cache=True)
def _supervised_step(w1, b1, w2, b2, x, t, eta, loss_code):
    n_in = x.size
    n_hid = b1.size
    n_out = t.size
    h = np.empty(n_hid)
    for j in range(n_hid):
        z = b1[j]
        for i in range(n_in):
            z += w1[j, i] * x[i]
        h[j] = 1.0 / (1.0 + np.exp(-z))
    y = np.empty(n_out)
    for k in range(n_out):
        z = b2[k]
        for j in range(n_hid):
            z += w2[k, j] * h[j]
        y[k] = 1.0 / (1.0 + np.exp(-z))
    d2 = np.empty(n_out)
    ok = True
    for k in range(n_out):
        r = y[k] - t[k]
        if loss_code == 0:
            d2[k] = r * y[k] * (1.0 - y[k]) * (2.0 / n_out)
        else:
            d2[k] = r / n_out
        if not np.isfinite(r):
            ok = False
    d1 = np.empty(n_hid)
    for j in range(n_hid):
        back = 0.0
        for k in range(n_out):
            back += w2[k, j] * d2[k]
        d1[j] = back * h[j] * (1.0 - h[j])
    for k in range(n_out):
        for j in range(n_hid):
            w2[k, j] -= eta * d2[k] * h[j]
        b2[k] -= eta * d2[k]
    for j in range(n_hid):
        for i in range(n_in):
            w1[j, i] -= eta * d1[j] * x[i]
        b1[j] -= eta * d1[j]
    return ok


@njit(cache=True)
def _composite_step(ew1, eb1, ew2, eb2, dw1, db1, dw2, db2, m, eta, loss_code):
    n1 = m.size
    n2e = eb1.size
    n3 = eb2.size
    n2d = db1.size
    h1 = np.empty(n2e)
    for j in range(n2e):
        z = eb1[j]
        for i in range(n1):
            z += ew1[j, i] * m[i]
        h1[j] = 1.0 / (1.0 + np.exp(-z))
    s = np.empty(n3)
    for k in range(n3):
        z = eb2[k]
        for j in range(n2e):
            z += ew2[k, j] * h1[j]
        s[k] = 1.0 / (1.0 + np.exp(-z))
    h2 = np.empty(n2d)
    for j in range(n2d):
        z = db1[j]
        for k in range(n3):
            z += dw1[j, k] * s[k]
        h2[j] = 1.0 / (1.0 + np.exp(-z))
    y = np.empty(n1)
    for k in range(n1):
        z = db2[k]
        for j in range(n2d):
            z += dw2[k, j] * h2[j]
        y[k] = 1.0 / (1.0 + np.exp(-z))
    d4 = np.empty(n1)
    ok = True
    for k in range(n1):
        r = y[k] - m[k]
        if loss_code == 0:
            d4[k] = r * y[k] * (1.0 - y[k]) * (2.0 / n1)
        else:
            d4[k] = r / n1
        if not np.isfinite(r):
            ok = False
    d3 = np.empty(n2d)
    for j in range(n2d):
        back = 0.0
        for k in range(n1):
            back += dw2[k, j] * d4[k]
        d3[j] = back * h2[j] * (1.0 - h2[j])
    d2 = np.empty(n3)
    for k in range(n3):
        back = 0.0
        for j in range(n2d):
            back += dw1[j, k] * d3[j]
        d2[k] = back * s[k] * (1.0 - s[k])
    d1 = np.empty(n2e)
    for j in range(n2e):
        back = 0.0
        for k in range(n3):
            back += ew2[k, j] * d2[k]
        d1[j] = back * h1[j] * (1.0 - h1[j])
    for k in range(n1):
        for j in range(n2d):
            dw2[k, j] -= eta * d4[k] * h2[j]
        db2[k] -= eta * d4[k]
    for j in range(n2d):
        for k in range(n3):
            dw1[j, k] -= eta * d3[j] * s[k]
        db1[j] -= eta * d3[j]
    for k in range(n3):
        for j in range(n2e):
            ew2[k, j] -= eta * d2[k] * h1[j]
        eb2[k] -= eta * d2[k]
    for j in range(n2e):
        for i in range(n1):
            ew1[j, i] -= eta * d1[j] * m[i]
        eb1[j] -= eta * d1[j]
    return ok


@njit(cache=True)
def train_schedule(ew1, eb1, ew2, eb2, dw1, db1, dw2, db2,
                   dec_in, dec_tg, enc_in, enc_tg, auto_in,
                   epochs, iters, r_iter, r_epoch, eta, loss_code):
    """Run the full semi-supervised schedule in place.

    Per iteration: decoder step, encoder step, r_iter composite steps;
    after each epoch's iterations, r_epoch composite steps. auto_in rows
    are consumed sequentially. Returns -1 on success, else the epoch
    index at which a non-finite loss first appeared.
    """
    a = 0
    for ep in range(epochs):
        for it in range(iters):
            row = ep * iters + it
            ok = _supervised_step(dw1, db1, dw2, db2, dec_in[row], dec_tg[row], eta, loss_code)
            ok &= _supervised_step(ew1, eb1, ew2, eb2, enc_in[row], enc_tg[row], eta, loss_code)
            for _ in range(r_iter):
                ok &= _composite_step(ew1, eb1, ew2, eb2, dw1, db1, dw2, db2,
                                      auto_in[a], eta, loss_code)
                a += 1
            if not ok:
                return ep
        for _ in range(r_epoch):
            ok = _composite_step(ew1, eb1, ew2, eb2, dw1, db1, dw2, db2,
                                 auto_in[a], eta, loss_code)
            a += 1
            if not ok:
                return ep
    return -1
