"""Compiled fixed-step RK4 core.

The closed loop is flattened into primitive arrays (edge lists, selector
indices, saturation parameter tables) so a single njit kernel serves all
model variants.  `sim.closed_loop_rhs` is the readable numpy reference;
the two implementations are cross-checked in the test suite.

State packing:
    basic/compartmental: [x(n), mu(m), xi(m), theta(p), phi(p)]
    potential:           [x(n), mu(m), theta(p), phi(p)]
    reduced:             [x(n), mu(m), theta(p)]
"""

from __future__ import annotations

import numpy as np
from numba import njit

VARIANT_CODE = {"basic": 0, "compartmental": 1, "potential": 2, "reduced": 3}
KIND_CODE = {"identity": 0, "linear": 1, "scaled_tanh": 2, "affine_tanh": 2, "scaled_arctan": 3}


def encode_saturations(maps) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(kind, lower, upper, gain) parameter table for a map family."""
    kind = np.array([KIND_CODE[s.kind] for s in maps], dtype=np.int64)
    lo = np.array([s.lower for s in maps], dtype=float)
    hi = np.array([s.upper for s in maps], dtype=float)
    gain = np.array([s.gain for s in maps], dtype=float)
    return kind, lo, hi, gain


@njit(cache=True, nogil=True, inline="always")
def _sat(kind, lo, hi, gain, z):
    if kind == 0:
        return z
    if kind == 1:
        return gain * z
    if kind == 2:
        v = lo + 0.5 * (hi - lo) * (np.tanh(gain * z) + 1.0)
    else:
        v = lo + (hi - lo) * (np.arctan(gain * z) / np.pi + 0.5)
    # the range is open: rounding in the tails must not touch the bounds
    return min(max(v, np.nextafter(lo, hi)), np.nextafter(hi, lo))


@njit(cache=True, nogil=True)
def _rhs(variant, w, out, n, m, p,
         tails, heads, act,
         tx, tmu, txi, tth, tph,
         fkind, flo, fhi, fgain,
         gkind, glo, ghi, ggain,
         hkind, hlo, hhi, hgain,
         q, r, lcom,
         ctails, cheads, ckind, cklo, ckhi, cgain,
         vc, ekind, eklo, ekhi, egain,
         d, ybar,
         lam, u, hx):
    # output maps and controller outputs
    for i in range(n):
        hx[i] = _sat(hkind[i], hlo[i], hhi[i], hgain[i], w[i])
    for k in range(m):
        lam[k] = _sat(fkind[k], flo[k], fhi[k], fgain[k], w[n + k])
    if variant == 0 or variant == 1:
        off_th = n + 2 * m
    else:
        off_th = n + m
    for j in range(p):
        u[j] = _sat(gkind[j], glo[j], ghi[j], ggain[j], w[off_th + j])

    # storage dynamics: T_x xdot = (Psi) - B lam + E u - d
    for i in range(n):
        out[i] = -d[i]
    for k in range(m):
        out[tails[k]] -= lam[k]
        out[heads[k]] += lam[k]
    for j in range(p):
        out[act[j]] += u[j]
    if variant == 1:
        for k in range(ctails.shape[0]):
            a = hx[ctails[k]] - hx[cheads[k]]
            g = _sat(ckind[k], cklo[k], ckhi[k], cgain[k], a)
            out[ctails[k]] -= g
            out[cheads[k]] += g
        for j in range(vc.shape[0]):
            e = _sat(ekind[j], eklo[j], ekhi[j], egain[j], hx[vc[j]])
            out[vc[j]] -= e
    for i in range(n):
        out[i] /= tx[i]

    # flow states
    for k in range(m):
        bty = (hx[tails[k]] - ybar[tails[k]]) - (hx[heads[k]] - ybar[heads[k]])
        if variant == 0 or variant == 1:
            xi = w[n + m + k]
            out[n + k] = (bty - (lam[k] - xi)) / tmu[k]
            out[n + m + k] = (lam[k] - xi) / txi[k]
        else:
            out[n + k] = bty / tmu[k]

    # input states
    if variant == 3:
        for j in range(p):
            acc = 0.0
            for i in range(p):
                acc += lcom[j, i] * (q[i] * u[i] + r[i])
            err = hx[act[j]] - ybar[act[j]]
            out[off_th + j] = (-q[j] * acc - err) / tth[j]
    else:
        off_ph = off_th + p
        for j in range(p):
            err = hx[act[j]] - ybar[act[j]]
            phi = w[off_ph + j]
            out[off_th + j] = (-err - (u[j] - phi)) / tth[j]
        for j in range(p):
            acc = 0.0
            for i in range(p):
                acc += lcom[j, i] * (q[i] * w[off_ph + i] + r[i])
            phi = w[off_ph + j]
            out[off_ph + j] = (u[j] - phi - q[j] * acc) / tph[j]


@njit(cache=True, nogil=True)
def run_segment(variant, w, dt, nsteps, k0, log_every, log_buf, log_count,
                n, m, p,
                tails, heads, act,
                tx, tmu, txi, tth, tph,
                fkind, flo, fhi, fgain,
                gkind, glo, ghi, ggain,
                hkind, hlo, hhi, hgain,
                q, r, lcom,
                ctails, cheads, ckind, cklo, ckhi, cgain,
                vc, ekind, eklo, ekhi, egain,
                d, ybar, margins):
    """Advance w by nsteps RK4 steps with global step offset k0.

    Rows are logged whenever the global step index is a multiple of
    log_every.  margins[0]/margins[1] accumulate the worst flow/input
    constraint margin over every visited step state.  Returns
    (log_count, status, bad_step) with status 1 on non-finite state.
    """
    dim = w.shape[0]
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    wt = np.empty(dim)
    lam = np.empty(m)
    u = np.empty(p)
    hx = np.empty(n)
    for s in range(nsteps):
        _rhs(variant, w, k1, n, m, p, tails, heads, act, tx, tmu, txi, tth, tph,
             fkind, flo, fhi, fgain, gkind, glo, ghi, ggain, hkind, hlo, hhi, hgain,
             q, r, lcom, ctails, cheads, ckind, cklo, ckhi, cgain,
             vc, ekind, eklo, ekhi, egain, d, ybar, lam, u, hx)
        # lam/u now hold the controller outputs at the current step state
        for k in range(m):
            if np.isfinite(flo[k]) and lam[k] - flo[k] < margins[0]:
                margins[0] = lam[k] - flo[k]
            if np.isfinite(fhi[k]) and fhi[k] - lam[k] < margins[0]:
                margins[0] = fhi[k] - lam[k]
        for j in range(p):
            if np.isfinite(glo[j]) and u[j] - glo[j] < margins[1]:
                margins[1] = u[j] - glo[j]
            if np.isfinite(ghi[j]) and ghi[j] - u[j] < margins[1]:
                margins[1] = ghi[j] - u[j]
        for i in range(dim):
            wt[i] = w[i] + 0.5 * dt * k1[i]
        _rhs(variant, wt, k2, n, m, p, tails, heads, act, tx, tmu, txi, tth, tph,
             fkind, flo, fhi, fgain, gkind, glo, ghi, ggain, hkind, hlo, hhi, hgain,
             q, r, lcom, ctails, cheads, ckind, cklo, ckhi, cgain,
             vc, ekind, eklo, ekhi, egain, d, ybar, lam, u, hx)
        for i in range(dim):
            wt[i] = w[i] + 0.5 * dt * k2[i]
        _rhs(variant, wt, k3, n, m, p, tails, heads, act, tx, tmu, txi, tth, tph,
             fkind, flo, fhi, fgain, gkind, glo, ghi, ggain, hkind, hlo, hhi, hgain,
             q, r, lcom, ctails, cheads, ckind, cklo, ckhi, cgain,
             vc, ekind, eklo, ekhi, egain, d, ybar, lam, u, hx)
        for i in range(dim):
            wt[i] = w[i] + dt * k3[i]
        _rhs(variant, wt, k4, n, m, p, tails, heads, act, tx, tmu, txi, tth, tph,
             fkind, flo, fhi, fgain, gkind, glo, ghi, ggain, hkind, hlo, hhi, hgain,
             q, r, lcom, ctails, cheads, ckind, cklo, ckhi, cgain,
             vc, ekind, eklo, ekhi, egain, d, ybar, lam, u, hx)
        for i in range(dim):
            w[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
        kg = k0 + s + 1
        if kg % log_every == 0:
            for i in range(dim):
                if not np.isfinite(w[i]):
                    return log_count, 1, kg
            for i in range(dim):
                log_buf[log_count, i] = w[i]
            log_count += 1
    for i in range(dim):
        if not np.isfinite(w[i]):
            return log_count, 1, k0 + nsteps
    return log_count, 0, -1
