# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled transient kernels.

Mirrors ``_pykernel.run`` step for step; only the arithmetic order inside
reductions differs, so results agree to round-off rather than bit-for-bit.
"""

import numpy as np

from libc.math cimport exp, log1p, fabs, INFINITY
from scipy.linalg.cython_lapack cimport dgesv

from ._pykernel import StepUnderflow

cdef double FD_STEP = 1e-3
cdef double MIN_STEP = 1e-18
cdef double TIME_EPS = 1e-22
cdef double NEWTON_VTOL = 1e-7
cdef int NEWTON_MAX_ITER = 40
cdef double NEWTON_DAMP = 0.3


cdef inline double _ids(double vg, double vd, double vs, double pol, double k,
                        double vth, double nvt) noexcept nogil:
    cdef double lo, vgs, vds, x, vov, i
    cdef bint fwd
    vg *= pol
    vd *= pol
    vs *= pol
    fwd = vd >= vs
    lo = vs if fwd else vd
    vgs = vg - lo
    vds = fabs(vd - vs)
    if nvt > 0:
        x = (vgs - vth) / nvt
        vov = nvt * ((x if x > 0 else 0.0) + log1p(exp(-fabs(x))))
    else:
        vov = vgs - vth
        if vov < 0:
            vov = 0.0
    if vds < vov:
        i = k * (vov * vds - 0.5 * vds * vds)
    else:
        i = 0.5 * k * vov * vov
    return pol * (i if fwd else -i)


cdef class _Net:
    cdef int n, nt, nr, nw
    cdef int[::1] tg, td, ts, ra, rb, wf_node, wf_off, hz_off
    cdef double[::1] tpol, tk, tvth, tnvt, rg, wf_t, wf_v, hz_a, hz_b
    cdef double[::1] gm, gd, gs

    def __init__(self, p):
        self.n = len(p.cap)
        self.tg, self.td, self.ts = p.tg, p.td, p.ts
        self.tpol, self.tk, self.tvth, self.tnvt = p.tpol, p.tk, p.tvth, p.tnvt
        self.nt = len(p.tg)
        self.ra, self.rb, self.rg = p.ra, p.rb, p.rg
        self.nr = len(p.rg)
        self.wf_node, self.wf_off, self.wf_t, self.wf_v = p.wf_node, p.wf_off, p.wf_t, p.wf_v
        self.hz_off, self.hz_a, self.hz_b = p.hz_off, p.hz_a, p.hz_b
        self.nw = len(p.wf_node)
        self.gm = np.zeros(self.nt)
        self.gd = np.zeros(self.nt)
        self.gs = np.zeros(self.nt)

    cdef void net_current(self, double[::1] V, double[::1] inet, bint derivs) noexcept nogil:
        cdef int j, a, b
        cdef double vg, vd, vs, i, h = FD_STEP, ir, pol, k, vth, nvt
        for j in range(self.n):
            inet[j] = 0.0
        for j in range(self.nt):
            vg = V[self.tg[j]]
            vd = V[self.td[j]]
            vs = V[self.ts[j]]
            pol = self.tpol[j]
            k = self.tk[j]
            vth = self.tvth[j]
            nvt = self.tnvt[j]
            i = _ids(vg, vd, vs, pol, k, vth, nvt)
            inet[self.td[j]] -= i
            inet[self.ts[j]] += i
            if derivs:
                self.gd[j] = (_ids(vg, vd + h, vs, pol, k, vth, nvt)
                              - _ids(vg, vd - h, vs, pol, k, vth, nvt)) / (2 * h)
                self.gm[j] = (_ids(vg + h, vd, vs, pol, k, vth, nvt)
                              - _ids(vg - h, vd, vs, pol, k, vth, nvt)) / (2 * h)
                self.gs[j] = -(self.gm[j] + self.gd[j])
        for j in range(self.nr):
            a = self.ra[j]
            b = self.rb[j]
            ir = self.rg[j] * (V[a] - V[b])
            inet[a] -= ir
            inet[b] += ir

    cdef double wave_value(self, int m, double t) noexcept nogil:
        cdef int a = self.wf_off[m], b = self.wf_off[m + 1] - 1, lo, hi, mid
        if t <= self.wf_t[a]:
            return self.wf_v[a]
        if t >= self.wf_t[b]:
            return self.wf_v[b]
        lo = a
        hi = b
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.wf_t[mid] <= t:
                lo = mid
            else:
                hi = mid
        return self.wf_v[lo] + (self.wf_v[hi] - self.wf_v[lo]) * (t - self.wf_t[lo]) / (self.wf_t[hi] - self.wf_t[lo])

    cdef bint driven(self, int m, double t) noexcept nogil:
        cdef int q
        for q in range(self.hz_off[m], self.hz_off[m + 1]):
            if self.hz_a[q] <= t + TIME_EPS and t + TIME_EPS < self.hz_b[q]:
                return False
        return True

    cdef void set_drivers(self, double[::1] V, double t, unsigned char[::1] mask_free) noexcept nogil:
        cdef int m, node
        for m in range(self.nw):
            node = self.wf_node[m]
            if not mask_free[node]:
                V[node] = self.wave_value(m, t)


def run(p, int method, double t_end, double dt_max, double sample_interval,
        double stability_factor):
    cdef _Net ck = _Net(p)
    cdef int n = ck.n, nw = ck.nw
    cdef int n_samples = int(round(t_end / sample_interval)) + 1
    cdef int nsrc = len(p.src_nodes)
    cdef int[::1] src_nodes = p.src_nodes
    cdef double[::1] cap = p.cap
    cdef double[::1] events = p.events
    cdef int n_ev = len(p.events)
    cdef unsigned char[::1] is_rail = p.is_rail

    times = np.arange(n_samples) * sample_interval
    Vs_arr = np.zeros((n_samples, n))
    Qs_arr = np.zeros((n_samples, nsrc))
    Es_arr = np.zeros((n_samples, nsrc))
    cdef double[:, ::1] Vs = Vs_arr
    cdef double[:, ::1] Qs = Qs_arr
    cdef double[:, ::1] Es = Es_arr

    cdef double[::1] V = p.v0.copy()
    cdef double[::1] V_old = np.empty(n)
    cdef double[::1] V_new = np.empty(n)
    cdef double[::1] inet = np.zeros(n)
    cdef double[::1] inew = np.zeros(n)
    cdef double[::1] g = np.zeros(n)
    cdef double[::1] q_acc = np.zeros(nsrc)
    cdef double[::1] e_acc = np.zeros(nsrc)
    cdef unsigned char[::1] mask_free = np.zeros(n, dtype=np.uint8)
    cdef int[::1] src_of = -np.ones(n, dtype=np.int32)
    cdef int[::1] pos = np.empty(n, dtype=np.int32)
    cdef int[::1] unk = np.empty(n, dtype=np.int32)
    cdef double[::1] A = np.empty(n * n)
    cdef double[::1] rhs = np.empty(n)
    cdef int[::1] ipiv = np.empty(n, dtype=np.int32)

    cdef long steps = 0, stab_limited = 0, cuts_total = 0
    cdef double min_dt = INFINITY
    cdef double t = 0.0, t_sample, t_event, dt, t_next, h, b, dq, v_new, vm, bound
    cdef int k_sample = 1, ev = 0, m, node, j, it, nu, cuts, info, nrhs = 1, r, c
    cdef bint ok, stab
    cdef double big, f

    for j in range(nsrc):
        src_of[src_nodes[j]] = j
    for m in range(nw):
        if ck.driven(m, 0.0):
            V[ck.wf_node[m]] = ck.wave_value(m, 0.0)
    Vs[0, :] = V

    while k_sample < n_samples:
        t_sample = k_sample * sample_interval
        while ev < n_ev and events[ev] <= t + TIME_EPS:
            ev += 1
        t_event = events[ev] if ev < n_ev else INFINITY

        for j in range(n):
            mask_free[j] = not is_rail[j]
        for m in range(nw):
            node = ck.wf_node[m]
            if ck.driven(m, t):
                mask_free[node] = 0
                v_new = ck.wave_value(m, t)
                if V[node] != v_new:
                    dq = cap[node] * (v_new - V[node])
                    j = src_of[node]
                    q_acc[j] += dq
                    e_acc[j] += v_new * dq
                    V[node] = v_new

        ck.net_current(V, inet, True)
        dt = dt_max
        if method == 0:
            for j in range(n):
                g[j] = 0.0
            for j in range(ck.nt):
                g[ck.td[j]] += fabs(ck.gd[j])
                g[ck.ts[j]] += fabs(ck.gs[j])
            for j in range(ck.nr):
                g[ck.ra[j]] += ck.rg[j]
                g[ck.rb[j]] += ck.rg[j]
            b = INFINITY
            for j in range(n):
                if mask_free[j] and g[j] > 0:
                    bound = stability_factor * cap[j] / g[j]
                    if bound < b:
                        b = bound
            if b < dt:
                dt = b
                stab_limited += 1
            if dt < MIN_STEP:
                raise StepUnderflow(f"stable step {dt:.3g} s below {MIN_STEP:g} s at t={t:.4g}")
        t_next = t + dt
        if t_sample < t_next:
            t_next = t_sample
        if t_event < t_next:
            t_next = t_event
        if t_sample - t_next < TIME_EPS:
            t_next = t_sample
        h = t_next - t

        V_old[:] = V
        if method == 0:
            V_new[:] = V
            for j in range(n):
                if mask_free[j]:
                    V_new[j] += h * inet[j] / cap[j]
            ck.set_drivers(V_new, t_next, mask_free)
            # Heun corrector: average the currents at both ends of the step
            ck.net_current(V_new, inew, False)
            for j in range(n):
                inet[j] = 0.5 * (inet[j] + inew[j])
                if mask_free[j]:
                    V_new[j] = V[j] + h * inet[j] / cap[j]
        else:
            nu = 0
            for j in range(n):
                if mask_free[j]:
                    pos[j] = nu
                    unk[nu] = j
                    nu += 1
                else:
                    pos[j] = -1
            cuts = 0
            while True:
                t_next = t + h
                if t_sample - t_next < TIME_EPS:
                    t_next = t_sample
                V_new[:] = V
                ck.set_drivers(V_new, t_next, mask_free)
                ok = True
                for it in range(NEWTON_MAX_ITER):
                    ck.net_current(V_new, inew, True)
                    if nu == 0:
                        break
                    for r in range(nu):
                        j = unk[r]
                        rhs[r] = -(cap[j] * (V_new[j] - V[j]) / h - 0.5 * (inew[j] + inet[j]))
                    _assemble(ck, cap, unk, pos, nu, h, A)
                    dgesv(&nu, &nrhs, &A[0], &nu, &ipiv[0], &rhs[0], &nu, &info)
                    if info != 0:
                        ok = False
                        break
                    big = 0.0
                    for r in range(nu):
                        if fabs(rhs[r]) > big:
                            big = fabs(rhs[r])
                    f = NEWTON_DAMP / big if big > NEWTON_DAMP else 1.0
                    for r in range(nu):
                        V_new[unk[r]] += f * rhs[r]
                    if big < NEWTON_VTOL:
                        break
                else:
                    ok = False
                if ok:
                    ck.net_current(V_new, inew, False)
                    break
                h *= 0.5
                cuts += 1
                if h < MIN_STEP:
                    raise StepUnderflow(f"Newton failed down to step {h:.3g} s at t={t:.4g}")
            cuts_total += cuts
            for j in range(n):
                inet[j] = 0.5 * (inet[j] + inew[j])

        for j in range(nsrc):
            node = src_nodes[j]
            dq = cap[node] * (V_new[node] - V_old[node]) - inet[node] * h
            vm = 0.5 * (V_new[node] + V_old[node])
            q_acc[j] += dq
            e_acc[j] += vm * dq
        V[:] = V_new
        t = t_next
        steps += 1
        if h < min_dt:
            min_dt = h
        if t == t_sample:
            Vs[k_sample, :] = V
            for j in range(nsrc):
                Qs[k_sample, j] = q_acc[j]
                Es[k_sample, j] = e_acc[j]
                q_acc[j] = 0.0
                e_acc[j] = 0.0
            k_sample += 1

    stats = {"steps": int(steps), "stability_limited": int(stab_limited),
             "newton_cuts": int(cuts_total), "min_dt": float(min_dt)}
    return times, Vs_arr, Qs_arr, Es_arr, stats


cdef void _assemble(_Net ck, double[::1] cap, int[::1] unk, int[::1] pos, int nu,
                    double h, double[::1] A) noexcept nogil:
    """Column-major ``diag(C/h) - J/2`` over the unknown nodes."""
    cdef int j, r, c, a, b, x
    cdef int rows[2]
    cdef double sgn[2]
    cdef int cols[3]
    cdef double gv[3]
    for j in range(nu * nu):
        A[j] = 0.0
    for r in range(nu):
        A[r * nu + r] = cap[unk[r]] / h
    for j in range(ck.nt):
        rows[0] = pos[ck.td[j]]
        rows[1] = pos[ck.ts[j]]
        sgn[0] = -1.0
        sgn[1] = 1.0
        cols[0] = pos[ck.tg[j]]
        cols[1] = pos[ck.td[j]]
        cols[2] = pos[ck.ts[j]]
        gv[0] = ck.gm[j]
        gv[1] = ck.gd[j]
        gv[2] = ck.gs[j]
        for a in range(2):
            r = rows[a]
            if r < 0:
                continue
            for b in range(3):
                c = cols[b]
                if c >= 0:
                    A[c * nu + r] -= 0.5 * sgn[a] * gv[b]
    for j in range(ck.nr):
        a = pos[ck.ra[j]]
        b = pos[ck.rb[j]]
        if a >= 0:
            A[a * nu + a] += 0.5 * ck.rg[j]
            if b >= 0:
                A[b * nu + a] -= 0.5 * ck.rg[j]
        if b >= 0:
            A[b * nu + b] += 0.5 * ck.rg[j]
            if a >= 0:
                A[a * nu + b] -= 0.5 * ck.rg[j]
