"""Jit-compiled path stepper for the regime-switching inventory diffusion.

One call advances a single path from its start to first exit or horizon:
Euler-Maruyama with steps split exactly at regime jump times (coefficients
frozen between jumps), accumulated discounting, and a gridded feedback
policy evaluated by multilinear interpolation.  Draw order per path is
fixed: one exponential on every regime entry, then per step one standard
normal per axis.  ``python_path`` mirrors the kernel operation-for-operation
(numba reproduces numpy ``Generator`` streams bit-exactly), and is used for
path recording and as a cross-check in the tests.

Cost kinds: 0 -> coef[0] * |y|^2, 1 -> sum_i coef[i] * y_i^2.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, fastmath=False)
def _interp_policy(pol, n, ndim, xlo, h, y, i0, frac, out):
    """Multilinear interpolation of the flat C-order policy lattice at y."""
    for ax in range(ndim):
        u = (y[ax] - xlo) / h
        i = int(math.floor(u))
        if i < 0:
            i = 0
        if i > n - 2:
            i = n - 2
        i0[ax] = i
        frac[ax] = u - i
    for comp in range(ndim):
        out[comp] = 0.0
    for corner in range(1 << ndim):
        w = 1.0
        idx = 0
        for ax in range(ndim):
            bit = (corner >> ax) & 1
            idx = idx * n + (i0[ax] + bit)
            if bit:
                w *= frac[ax]
            else:
                w *= 1.0 - frac[ax]
        base = idx * ndim
        for comp in range(ndim):
            out[comp] += w * pol[base + comp]


@njit(cache=True, fastmath=False)
def run_path(gen, y, eps0, radius,
             a1, a2, alpha1, alpha2, sigma1, sigma2,
             fkind1, fcoef1, fkind2, fcoef2,
             dt, horizon,
             use_policy, pol1, pol2, npts, xlo, h, scale, swap,
             rec, rec_cap):
    """Advance one path; returns (cost, exit_time, truncated, exit_norm, n_rec).

    ``y`` is mutated in place.  ``rec`` is a (rec_cap, 3 + ndim) buffer of
    rows (t, regime, y..., discount, running cost); pass rec_cap=0 to skip
    recording.
    """
    ndim = y.shape[0]
    i0 = np.empty(ndim, dtype=np.int64)
    frac = np.empty(ndim)
    p = np.zeros(ndim)
    t = 0.0
    disc = 0.0
    cost = 0.0
    reg = eps0
    rate = a1 if reg == 1 else a2
    t_jump = t + gen.standard_exponential() / rate
    n_rec = 0
    if n_rec < rec_cap:
        rec[n_rec, 0] = t
        rec[n_rec, 1] = reg
        for ax in range(ndim):
            rec[n_rec, 2 + ax] = y[ax]
        rec[n_rec, 2 + ndim] = disc
        rec[n_rec, 3 + ndim] = cost
        n_rec += 1
    while True:
        if reg == 1:
            sig = sigma1
            al = alpha1
            fkind = fkind1
            fcoef = fcoef1
        else:
            sig = sigma2
            al = alpha2
            fkind = fkind2
            fcoef = fcoef2
        t_end = t + dt
        if t_jump < t_end:
            t_end = t_jump
        truncated = False
        if t_end >= horizon:
            t_end = horizon
            truncated = True
        hstep = t_end - t
        if use_policy and scale != 0.0:
            if swap:
                if reg == 1:
                    _interp_policy(pol2, npts, ndim, xlo, h, y, i0, frac, p)
                else:
                    _interp_policy(pol1, npts, ndim, xlo, h, y, i0, frac, p)
            else:
                if reg == 1:
                    _interp_policy(pol1, npts, ndim, xlo, h, y, i0, frac, p)
                else:
                    _interp_policy(pol2, npts, ndim, xlo, h, y, i0, frac, p)
            for ax in range(ndim):
                p[ax] *= scale
        else:
            for ax in range(ndim):
                p[ax] = 0.0
        psq = 0.0
        for ax in range(ndim):
            psq += p[ax] * p[ax]
        if fkind == 0:
            ysq = 0.0
            for ax in range(ndim):
                ysq += y[ax] * y[ax]
            f = fcoef[0] * ysq
        else:
            f = 0.0
            for ax in range(ndim):
                f += fcoef[ax] * y[ax] * y[ax]
        cost += math.exp(-disc) * (psq + f) * hstep
        root = math.sqrt(hstep)
        for ax in range(ndim):
            y[ax] += p[ax] * hstep + sig * root * gen.standard_normal()
        disc += al * hstep
        t = t_end
        if n_rec < rec_cap:
            rec[n_rec, 0] = t
            rec[n_rec, 1] = reg
            for ax in range(ndim):
                rec[n_rec, 2 + ax] = y[ax]
            rec[n_rec, 2 + ndim] = disc
            rec[n_rec, 3 + ndim] = cost
            n_rec += 1
        ysq = 0.0
        for ax in range(ndim):
            ysq += y[ax] * y[ax]
        ynorm = math.sqrt(ysq)
        if ynorm >= radius:
            return cost, t, False, ynorm, n_rec
        if truncated:
            return cost, t, True, ynorm, n_rec
        if t >= t_jump:
            reg = 3 - reg
            rate = a1 if reg == 1 else a2
            t_jump = t + gen.standard_exponential() / rate


def python_path(gen, y, eps0, radius,
                a1, a2, alpha1, alpha2, sigma1, sigma2,
                cost1, cost2, dt, horizon,
                policy_eval, scale, swap, record=None):
    """Pure-Python mirror of :func:`run_path` with identical draw order.

    ``policy_eval(y, regime) -> vector`` or None for the zero policy;
    ``cost1``/``cost2`` are callables on points.  ``record``, when given, is
    a list collecting (t, regime, y copy, discount, running cost) rows.
    """
    ndim = y.shape[0]
    t = 0.0
    disc = 0.0
    cost = 0.0
    reg = eps0
    rate = a1 if reg == 1 else a2
    t_jump = t + gen.standard_exponential() / rate
    if record is not None:
        record.append((t, reg, y.copy(), disc, cost))
    while True:
        sig = sigma1 if reg == 1 else sigma2
        al = alpha1 if reg == 1 else alpha2
        fcur = cost1 if reg == 1 else cost2
        t_end = t + dt
        if t_jump < t_end:
            t_end = t_jump
        truncated = False
        if t_end >= horizon:
            t_end = horizon
            truncated = True
        hstep = t_end - t
        if policy_eval is not None and scale != 0.0:
            r_eff = (3 - reg) if swap else reg
            p = policy_eval(y, r_eff) * scale
        else:
            p = np.zeros(ndim)
        psq = float(p @ p)
        f = float(fcur(y))
        cost += math.exp(-disc) * (psq + f) * hstep
        root = math.sqrt(hstep)
        for ax in range(ndim):
            y[ax] += p[ax] * hstep + sig * root * gen.standard_normal()
        disc += al * hstep
        t = t_end
        if record is not None:
            record.append((t, reg, y.copy(), disc, cost))
        ynorm = float(np.sqrt(y @ y))
        if ynorm >= radius:
            return cost, t, False, ynorm
        if truncated:
            return cost, t, True, ynorm
        if t >= t_jump:
            reg = 3 - reg
            rate = a1 if reg == 1 else a2
            t_jump = t + gen.standard_exponential() / rate
