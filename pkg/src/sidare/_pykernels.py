"""Pure-Python integration kernels (fallback when the compiled core is absent).

Semantics match ``sidare._kernels`` exactly: same RK4 stage structure, same
expression ordering, so both backends produce bit-identical trajectories.
Scalar floats in tight loops; numpy only at the boundaries.

Rate tuples are packed as
(beta, gamma_i, gamma_d, gamma_a, nu, xi_i, xi_d, mu, mu_hat, h_bar).
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def forward_sweep(u, x0, rates, dt, tol):
    """RK4-integrate the controlled five-state system over the node grid.

    ``u`` holds one control value per node; cell k uses ``u[k]`` for all
    stages.  States within ``tol`` of the [0, 1] boundary are clamped onto
    it; larger violations stop the integration.

    Returns (states, bad_node) where states is (N, 5) for (s, i, d, a, e)
    and bad_node is the first offending node index, or -1 if none.
    """
    beta, gi, gd, ga, nu, xii, xid, mu, muhat, hbar = (float(v) for v in rates)
    n = len(u)
    out = np.empty((n, 5))
    s = float(x0[0])
    i = float(x0[1])
    d = float(x0[2])
    a = float(x0[3])
    e = float(x0[4])
    out[0, 0] = s
    out[0, 1] = i
    out[0, 2] = d
    out[0, 3] = a
    out[0, 4] = e
    dt = float(dt)
    tol = float(tol)

    def f(s, i, d, a, uk):
        if a <= hbar:
            outflow = mu * a
        else:
            outflow = mu * hbar + muhat * (a - hbar)
        infection = beta * s * i * (1.0 - uk)
        return (-infection,
                infection - (gi + xii + nu) * i,
                nu * i - (gd + xid) * d,
                xii * i + xid * d - ga * a - outflow,
                outflow)

    for k in range(n - 1):
        uk = float(u[k])
        a1, b1, c1, d1, e1 = f(s, i, d, a, uk)
        a2, b2, c2, d2, e2 = f(s + 0.5 * dt * a1, i + 0.5 * dt * b1,
                               d + 0.5 * dt * c1, a + 0.5 * dt * d1, uk)
        a3, b3, c3, d3, e3 = f(s + 0.5 * dt * a2, i + 0.5 * dt * b2,
                               d + 0.5 * dt * c2, a + 0.5 * dt * d2, uk)
        a4, b4, c4, d4, e4 = f(s + dt * a3, i + dt * b3,
                               d + dt * c3, a + dt * d3, uk)
        s = s + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        i = i + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        d = d + (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        a = a + (dt / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
        e = e + (dt / 6.0) * (e1 + 2.0 * e2 + 2.0 * e3 + e4)

        bad = False
        if s < 0.0:
            if s >= -tol:
                s = 0.0
            else:
                bad = True
        elif s > 1.0:
            if s <= 1.0 + tol:
                s = 1.0
            else:
                bad = True
        if i < 0.0:
            if i >= -tol:
                i = 0.0
            else:
                bad = True
        elif i > 1.0:
            if i <= 1.0 + tol:
                i = 1.0
            else:
                bad = True
        if d < 0.0:
            if d >= -tol:
                d = 0.0
            else:
                bad = True
        elif d > 1.0:
            if d <= 1.0 + tol:
                d = 1.0
            else:
                bad = True
        if a < 0.0:
            if a >= -tol:
                a = 0.0
            else:
                bad = True
        elif a > 1.0:
            if a <= 1.0 + tol:
                a = 1.0
            else:
                bad = True
        if e < 0.0:
            if e >= -tol:
                e = 0.0
            else:
                bad = True
        elif e > 1.0:
            if e <= 1.0 + tol:
                e = 1.0
            else:
                bad = True
        r = 1.0 - s - i - d - a - e
        if r < -tol or r > 1.0 + tol:
            bad = True
        if bad or s != s or i != i or d != d or a != a or e != e:
            return out, k + 1

        out[k + 1, 0] = s
        out[k + 1, 1] = i
        out[k + 1, 2] = d
        out[k + 1, 3] = a
        out[k + 1, 4] = e
    return out, -1


def backward_sweep(states, u, rates, theta_a, theta_e, dt):
    """RK4-integrate the costate from the terminal condition back to t = 0.

    Midpoint states for the half-step stages come from cubic Hermite
    interpolation within each cell, so the backward pass keeps RK4's order.
    The capacity-mortality derivative at the kink uses the sub-capacity
    branch.  Returns (N, 5) costates (lam_s, lam_i, lam_d, lam_a, lam_e).
    """
    beta, gi, gd, ga, nu, xii, xid, mu, muhat, hbar = (float(v) for v in rates)
    n = states.shape[0]
    lam = np.empty((n, 5))
    theta_a = float(theta_a)
    dt = float(dt)
    ls = 0.0
    li = 0.0
    ld = 0.0
    la = 0.0
    le = float(theta_e)
    lam[n - 1] = (ls, li, ld, la, le)

    def f(s, i, d, a, uk):
        if a <= hbar:
            outflow = mu * a
        else:
            outflow = mu * hbar + muhat * (a - hbar)
        infection = beta * s * i * (1.0 - uk)
        return (-infection,
                infection - (gi + xii + nu) * i,
                nu * i - (gd + xid) * d,
                xii * i + xid * d - ga * a - outflow,
                outflow)

    def g(ls, li, ld, la, le, s, i, a, uk):
        if a <= hbar:
            dmu = mu
        else:
            dmu = muhat
        bi = beta * (1.0 - uk)
        return (bi * i * (ls - li),
                bi * s * (ls - li) + (gi + xii + nu) * li - nu * ld - xii * la,
                (gd + xid) * ld - xid * la,
                -theta_a * a + (ga + dmu) * la - dmu * le,
                0.0)

    h = -dt
    for k in range(n - 2, -1, -1):
        uk = float(u[k])
        sl, il, dl, al, el = states[k]
        sr, ir, dr, ar, er = states[k + 1]
        fl = f(sl, il, dl, al, uk)
        fr = f(sr, ir, dr, ar, uk)
        sm = 0.5 * (sl + sr) + (dt / 8.0) * (fl[0] - fr[0])
        im = 0.5 * (il + ir) + (dt / 8.0) * (fl[1] - fr[1])
        am = 0.5 * (al + ar) + (dt / 8.0) * (fl[3] - fr[3])

        a1, b1, c1, d1, e1 = g(ls, li, ld, la, le, sr, ir, ar, uk)
        a2, b2, c2, d2, e2 = g(ls + 0.5 * h * a1, li + 0.5 * h * b1,
                               ld + 0.5 * h * c1, la + 0.5 * h * d1,
                               le + 0.5 * h * e1, sm, im, am, uk)
        a3, b3, c3, d3, e3 = g(ls + 0.5 * h * a2, li + 0.5 * h * b2,
                               ld + 0.5 * h * c2, la + 0.5 * h * d2,
                               le + 0.5 * h * e2, sm, im, am, uk)
        a4, b4, c4, d4, e4 = g(ls + h * a3, li + h * b3,
                               ld + h * c3, la + h * d3,
                               le + h * e3, sl, il, al, uk)
        ls = ls + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        li = li + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        ld = ld + (h / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        la = la + (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
        le = le + (h / 6.0) * (e1 + 2.0 * e2 + 2.0 * e3 + e4)
        lam[k, 0] = ls
        lam[k, 1] = li
        lam[k, 2] = ld
        lam[k, 3] = la
        lam[k, 4] = le
    return lam
