"""Pure numpy transient kernels.

Same contract and arithmetic as the compiled ``_ckernel``; used when the
extension is not built or when ``NWRAM_PURE_PYTHON`` is set.
"""

from __future__ import annotations

import numpy as np

from ._compile import METHOD_EXPLICIT, METHOD_TRAPEZOIDAL, Problem

FD_STEP = 1e-3
MIN_STEP = 1e-18
TIME_EPS = 1e-22
NEWTON_VTOL = 1e-7
NEWTON_MAX_ITER = 40
NEWTON_DAMP = 0.3


class StepUnderflow(RuntimeError):
    pass


def ids(vg, vd, vs, pol, k, vth, nvt):
    """Vectorised drain->source current of the smoothed square-law model."""
    vg, vd, vs = vg * pol, vd * pol, vs * pol
    fwd = vd >= vs
    lo = np.where(fwd, vs, vd)
    vgs = vg - lo
    vds = np.abs(vd - vs)
    with np.errstate(divide="ignore", invalid="ignore"):
        soft = nvt * np.logaddexp(0.0, (vgs - vth) / np.where(nvt > 0, nvt, 1.0))
    vov = np.where(nvt > 0, soft, np.maximum(vgs - vth, 0.0))
    i = np.where(vds < vov, k * (vov * vds - 0.5 * vds * vds), 0.5 * k * vov * vov)
    return pol * np.where(fwd, i, -i)


class _Circuit:
    def __init__(self, p: Problem):
        self.p = p
        self.n = len(p.cap)
        self.nw = len(p.wf_node)

    def net_current(self, V, with_derivs=False):
        p = self.p
        vg, vd, vs = V[p.tg], V[p.td], V[p.ts]
        args = (p.tpol, p.tk, p.tvth, p.tnvt)
        i = ids(vg, vd, vs, *args)
        inet = np.zeros(self.n)
        np.subtract.at(inet, p.td, i)
        np.add.at(inet, p.ts, i)
        if len(p.rg):
            ir = p.rg * (V[p.ra] - V[p.rb])
            np.subtract.at(inet, p.ra, ir)
            np.add.at(inet, p.rb, ir)
        if not with_derivs:
            return inet, None
        h = FD_STEP
        gd = (ids(vg, vd + h, vs, *args) - ids(vg, vd - h, vs, *args)) / (2 * h)
        gm = (ids(vg + h, vd, vs, *args) - ids(vg - h, vd, vs, *args)) / (2 * h)
        gs = -(gm + gd)
        return inet, (gm, gd, gs)

    def wave_value(self, m, t):
        p = self.p
        a, b = p.wf_off[m], p.wf_off[m + 1]
        return float(np.interp(t, p.wf_t[a:b], p.wf_v[a:b]))

    def driven(self, m, t):
        p = self.p
        for q in range(p.hz_off[m], p.hz_off[m + 1]):
            if p.hz_a[q] <= t + TIME_EPS and t + TIME_EPS < p.hz_b[q]:
                return False
        return True


def run(p: Problem, method: int, t_end: float, dt_max: float, sample_interval: float,
        stability_factor: float):
    ck = _Circuit(p)
    n = ck.n
    n_samples = int(round(t_end / sample_interval)) + 1
    nsrc = len(p.src_nodes)
    src_pos = {int(node): j for j, node in enumerate(p.src_nodes)}

    times = np.arange(n_samples) * sample_interval
    Vs = np.zeros((n_samples, n))
    Qs = np.zeros((n_samples, nsrc))
    Es = np.zeros((n_samples, nsrc))
    stats = {"steps": 0, "stability_limited": 0, "newton_cuts": 0, "min_dt": np.inf}

    V = p.v0.copy()
    is_rail = p.is_rail.astype(bool)
    cap = p.cap
    free = ~is_rail
    wave_of = {int(node): m for m, node in enumerate(p.wf_node)}
    t = 0.0
    for m in range(ck.nw):
        if ck.driven(m, 0.0):
            V[p.wf_node[m]] = ck.wave_value(m, 0.0)
    Vs[0] = V
    k_sample = 1
    ev = 0
    q_acc = np.zeros(nsrc)
    e_acc = np.zeros(nsrc)

    while k_sample < n_samples:
        t_sample = k_sample * sample_interval
        while ev < len(p.events) and p.events[ev] <= t + TIME_EPS:
            ev += 1
        t_event = p.events[ev] if ev < len(p.events) else np.inf

        # driver state is constant over the step
        mask_free = free.copy()
        for m in range(ck.nw):
            node = p.wf_node[m]
            if ck.driven(m, t):
                mask_free[node] = False
                v_new = ck.wave_value(m, t)
                if V[node] != v_new:
                    dq = cap[node] * (v_new - V[node])
                    j = src_pos[int(node)]
                    q_acc[j] += dq
                    e_acc[j] += v_new * dq
                    V[node] = v_new

        inet, d = ck.net_current(V, with_derivs=True)
        dt = dt_max
        if method == METHOD_EXPLICIT:
            g = _diag_conductance(p, d, n)
            with np.errstate(divide="ignore"):
                bound = np.where(mask_free & (g > 0), stability_factor * cap / np.where(g > 0, g, 1.0), np.inf)
            b = bound.min() if n else np.inf
            if b < dt:
                dt = b
                stats["stability_limited"] += 1
            if dt < MIN_STEP:
                raise StepUnderflow(f"stable step {dt:.3g} s below {MIN_STEP:g} s at t={t:.4g}")
        t_next = min(t + dt, t_sample, t_event)
        if t_sample - t_next < TIME_EPS:
            t_next = t_sample
        h = t_next - t

        V_old = V.copy()
        if method == METHOD_EXPLICIT:
            V_new = V.copy()
            V_new[mask_free] += h * inet[mask_free] / cap[mask_free]
            _set_drivers(ck, p, V_new, t_next, mask_free)
            # Heun corrector: average the currents at both ends of the step
            inet_avg = 0.5 * (inet + ck.net_current(V_new)[0])
            V_new[mask_free] = V[mask_free] + h * inet_avg[mask_free] / cap[mask_free]
        else:
            V_new, inet_new, h, t_next, cuts = _trap_step(ck, p, V, inet, d, mask_free, t, h, t_sample)
            stats["newton_cuts"] += cuts
            inet_avg = 0.5 * (inet + inet_new)

        for j, node in enumerate(p.src_nodes):
            dq = cap[node] * (V_new[node] - V_old[node]) - inet_avg[node] * h
            vm = 0.5 * (V_new[node] + V_old[node])
            q_acc[j] += dq
            e_acc[j] += vm * dq
        V = V_new
        t = t_next
        stats["steps"] += 1
        stats["min_dt"] = min(stats["min_dt"], h)
        if t == t_sample:
            Vs[k_sample] = V
            Qs[k_sample] = q_acc
            Es[k_sample] = e_acc
            q_acc[:] = 0.0
            e_acc[:] = 0.0
            k_sample += 1
    return times, Vs, Qs, Es, stats


def _diag_conductance(p: Problem, d, n):
    gm, gd, gs = d
    g = np.zeros(n)
    np.add.at(g, p.td, np.abs(gd))
    np.add.at(g, p.ts, np.abs(gs))
    if len(p.rg):
        np.add.at(g, p.ra, p.rg)
        np.add.at(g, p.rb, p.rg)
    return g


def _set_drivers(ck, p, V, t, mask_free):
    for m in range(ck.nw):
        node = p.wf_node[m]
        if not mask_free[node]:
            V[node] = ck.wave_value(m, t)


def _trap_step(ck, p, V, inet, d, mask_free, t, h, t_sample):
    """Trapezoidal step with Newton; halves the step on non-convergence."""
    cap = p.cap
    unk = np.flatnonzero(mask_free)
    pos = -np.ones(len(cap), dtype=np.int64)
    pos[unk] = np.arange(len(unk))
    cuts = 0
    while True:
        t_next = t + h
        if t_sample - t_next < TIME_EPS:
            t_next = t_sample
        Vn = V.copy()
        _set_drivers(ck, p, Vn, t_next, mask_free)
        ok = True
        for _ in range(NEWTON_MAX_ITER):
            inew, dn = ck.net_current(Vn, with_derivs=True)
            F = cap[unk] * (Vn[unk] - V[unk]) / h - 0.5 * (inew[unk] + inet[unk])
            if len(unk) == 0:
                break
            A = np.diag(cap[unk] / h) - 0.5 * _jacobian(p, dn, pos, len(unk))
            try:
                dv = np.linalg.solve(A, -F)
            except np.linalg.LinAlgError:
                ok = False
                break
            big = np.abs(dv).max()
            if big > NEWTON_DAMP:
                dv *= NEWTON_DAMP / big
            Vn[unk] += dv
            if big < NEWTON_VTOL:
                break
        else:
            ok = False
        if ok:
            inew, _ = ck.net_current(Vn)
            return Vn, inew, h, t_next, cuts
        h *= 0.5
        cuts += 1
        if h < MIN_STEP:
            raise StepUnderflow(f"Newton failed down to step {h:.3g} s at t={t:.4g}")


def _jacobian(p: Problem, d, pos, m):
    gm, gd, gs = d
    J = np.zeros((m, m))
    for row_nodes, sign in ((p.td, -1.0), (p.ts, 1.0)):
        r = pos[row_nodes]
        for col_nodes, g in ((p.tg, gm), (p.td, gd), (p.ts, gs)):
            c = pos[col_nodes]
            ok = (r >= 0) & (c >= 0)
            np.add.at(J, (r[ok], c[ok]), sign * g[ok])
    if len(p.rg):
        a, b = pos[p.ra], pos[p.rb]
        for x, y, s in ((a, a, -1), (a, b, 1), (b, b, -1), (b, a, 1)):
            ok = (x >= 0) & (y >= 0)
            np.add.at(J, (x[ok], y[ok]), s * p.rg[ok])
    return J
