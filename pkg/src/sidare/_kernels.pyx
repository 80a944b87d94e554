# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernels (hot loops of the solver).

Mirrors ``sidare._pykernels`` operation-for-operation; compiled with
-ffp-contract=off so both backends agree bitwise.
"""

import numpy as np


COMPILED = True


cdef struct Rates:
    double beta
    double gi
    double gd
    double ga
    double nu
    double xii
    double xid
    double mu
    double muhat
    double hbar


cdef inline void _f(double s, double i, double d, double a, double uk,
                    Rates* r, double* out) nogil:
    cdef double outflow, infection
    if a <= r.hbar:
        outflow = r.mu * a
    else:
        outflow = r.mu * r.hbar + r.muhat * (a - r.hbar)
    infection = r.beta * s * i * (1.0 - uk)
    out[0] = -infection
    out[1] = infection - (r.gi + r.xii + r.nu) * i
    out[2] = r.nu * i - (r.gd + r.xid) * d
    out[3] = r.xii * i + r.xid * d - r.ga * a - outflow
    out[4] = outflow


cdef inline void _g(double ls, double li, double ld, double la, double le,
                    double s, double i, double a, double uk,
                    double theta_a, Rates* r, double* out) nogil:
    cdef double dmu, bi
    if a <= r.hbar:
        dmu = r.mu
    else:
        dmu = r.muhat
    bi = r.beta * (1.0 - uk)
    out[0] = bi * i * (ls - li)
    out[1] = bi * s * (ls - li) + (r.gi + r.xii + r.nu) * li - r.nu * ld - r.xii * la
    out[2] = (r.gd + r.xid) * ld - r.xid * la
    out[3] = -theta_a * a + (r.ga + dmu) * la - dmu * le
    out[4] = 0.0


cdef Rates _pack(rates):
    cdef Rates r
    r.beta = rates[0]
    r.gi = rates[1]
    r.gd = rates[2]
    r.ga = rates[3]
    r.nu = rates[4]
    r.xii = rates[5]
    r.xid = rates[6]
    r.mu = rates[7]
    r.muhat = rates[8]
    r.hbar = rates[9]
    return r


def forward_sweep(u, x0, rates, double dt, double tol):
    """See ``sidare._pykernels.forward_sweep``."""
    cdef Rates r = _pack(rates)
    u_arr = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] uv = u_arr
    cdef Py_ssize_t n = uv.shape[0]
    out_arr = np.empty((n, 5))
    cdef double[:, ::1] out = out_arr
    cdef double s = x0[0]
    cdef double i = x0[1]
    cdef double d = x0[2]
    cdef double a = x0[3]
    cdef double e = x0[4]
    cdef double uk, rr
    cdef double k1[5]
    cdef double k2[5]
    cdef double k3[5]
    cdef double k4[5]
    cdef Py_ssize_t k
    cdef int bad_node = -1
    cdef bint bad

    out[0, 0] = s
    out[0, 1] = i
    out[0, 2] = d
    out[0, 3] = a
    out[0, 4] = e

    with nogil:
        for k in range(n - 1):
            uk = uv[k]
            _f(s, i, d, a, uk, &r, k1)
            _f(s + 0.5 * dt * k1[0], i + 0.5 * dt * k1[1],
               d + 0.5 * dt * k1[2], a + 0.5 * dt * k1[3], uk, &r, k2)
            _f(s + 0.5 * dt * k2[0], i + 0.5 * dt * k2[1],
               d + 0.5 * dt * k2[2], a + 0.5 * dt * k2[3], uk, &r, k3)
            _f(s + dt * k3[0], i + dt * k3[1],
               d + dt * k3[2], a + dt * k3[3], uk, &r, k4)
            s = s + (dt / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            i = i + (dt / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            d = d + (dt / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
            a = a + (dt / 6.0) * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
            e = e + (dt / 6.0) * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4])

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
            rr = 1.0 - s - i - d - a - e
            if rr < -tol or rr > 1.0 + tol:
                bad = True
            if bad or s != s or i != i or d != d or a != a or e != e:
                bad_node = <int>(k + 1)
                break

            out[k + 1, 0] = s
            out[k + 1, 1] = i
            out[k + 1, 2] = d
            out[k + 1, 3] = a
            out[k + 1, 4] = e
    return out_arr, bad_node


def backward_sweep(states, u, rates, double theta_a, double theta_e, double dt):
    """See ``sidare._pykernels.backward_sweep``."""
    cdef Rates r = _pack(rates)
    st_arr = np.ascontiguousarray(states, dtype=np.float64)
    u_arr = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[:, ::1] st = st_arr
    cdef const double[::1] uv = u_arr
    cdef Py_ssize_t n = st.shape[0]
    lam_arr = np.empty((n, 5))
    cdef double[:, ::1] lam = lam_arr
    cdef double ls = 0.0
    cdef double li = 0.0
    cdef double ld = 0.0
    cdef double la = 0.0
    cdef double le = theta_e
    cdef double uk, sl, il, dl, al, sr, ir, dr, ar, sm, im, am
    cdef double fl[5]
    cdef double fr[5]
    cdef double k1[5]
    cdef double k2[5]
    cdef double k3[5]
    cdef double k4[5]
    cdef double h = -dt
    cdef Py_ssize_t k

    lam[n - 1, 0] = ls
    lam[n - 1, 1] = li
    lam[n - 1, 2] = ld
    lam[n - 1, 3] = la
    lam[n - 1, 4] = le

    with nogil:
        for k in range(n - 2, -1, -1):
            uk = uv[k]
            sl = st[k, 0]
            il = st[k, 1]
            dl = st[k, 2]
            al = st[k, 3]
            sr = st[k + 1, 0]
            ir = st[k + 1, 1]
            dr = st[k + 1, 2]
            ar = st[k + 1, 3]
            _f(sl, il, dl, al, uk, &r, fl)
            _f(sr, ir, dr, ar, uk, &r, fr)
            sm = 0.5 * (sl + sr) + (dt / 8.0) * (fl[0] - fr[0])
            im = 0.5 * (il + ir) + (dt / 8.0) * (fl[1] - fr[1])
            am = 0.5 * (al + ar) + (dt / 8.0) * (fl[3] - fr[3])

            _g(ls, li, ld, la, le, sr, ir, ar, uk, theta_a, &r, k1)
            _g(ls + 0.5 * h * k1[0], li + 0.5 * h * k1[1],
               ld + 0.5 * h * k1[2], la + 0.5 * h * k1[3],
               le + 0.5 * h * k1[4], sm, im, am, uk, theta_a, &r, k2)
            _g(ls + 0.5 * h * k2[0], li + 0.5 * h * k2[1],
               ld + 0.5 * h * k2[2], la + 0.5 * h * k2[3],
               le + 0.5 * h * k2[4], sm, im, am, uk, theta_a, &r, k3)
            _g(ls + h * k3[0], li + h * k3[1],
               ld + h * k3[2], la + h * k3[3],
               le + h * k3[4], sl, il, al, uk, theta_a, &r, k4)
            ls = ls + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            li = li + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            ld = ld + (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
            la = la + (h / 6.0) * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
            le = le + (h / 6.0) * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4])
            lam[k, 0] = ls
            lam[k, 1] = li
            lam[k, 2] = ld
            lam[k, 3] = la
            lam[k, 4] = le
    return lam_arr
