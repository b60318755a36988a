"""JIT-compiled inner-loop kernels for the session engine.

These mirror the reference implementations in ``world`` and ``driver``
exactly (unit tests assert agreement); they exist because the closed loop
runs at 100 Hz for hundreds of simulated seconds per session and a cohort is
72 sessions. When numba is unavailable the engine falls back to the
reference numpy path with identical semantics.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def observe(positions, lengths, leader, circumference, free_arc):
    """Per-vehicle (gap, leader speed placeholder) kernel: gaps only.

    Matches WorldState.gaps(): raw mod-circumference gaps, with values beyond
    the free arc mapped back to negative overlap.
    """
    n = positions.shape[0]
    gaps = np.empty(n)
    for i in range(n):
        j = leader[i]
        raw = (positions[j] - lengths[j] - positions[i]) % circumference
        gaps[i] = raw if raw <= free_arc + 1e-9 else raw - circumference
    return gaps


@njit(cache=True)
def traffic_accel(v, gap, v_lead, a_lead, v0, T, s0, a, b, delta, coolness, hard_decel):
    """Improved-IDM + CAH blend, one scalar loop over the platoon.

    All parameter inputs are per-car arrays; mirrors driver.iidm_accel
    followed by driver.cah_blend.
    """
    n = v.shape[0]
    out = np.empty(n)
    for i in range(n):
        vi = v[i]
        si = gap[i]
        vl = v_lead[i]
        v0i = v0[i]
        ai = a[i]
        bi = b[i]
        di = delta[i]
        dv = vi - vl
        s_star = s0[i] + max(0.0, vi * T[i] + vi * dv / (2.0 * np.sqrt(ai * bi)))
        z = s_star / si
        if vi > v0i:
            a_free = -bi * (1.0 - (v0i / vi) ** (ai * di / bi))
            if z >= 1.0:
                acc = a_free + ai * (1.0 - z * z)
            else:
                acc = a_free
        else:
            a_free = ai * (1.0 - (vi / v0i) ** di)
            if z >= 1.0:
                acc = ai * (1.0 - z * z)
            elif a_free == 0.0:
                acc = 0.0
            else:
                expo = (2.0 * ai / a_free) * np.log(z)
                if expo > 0.0:
                    expo = 0.0
                acc = a_free * (1.0 - np.exp(expo))

        # Constant-acceleration heuristic and the coolness blend.
        a_tilde = a_lead[i] if a_lead[i] < ai else ai
        denom = vl * vl - 2.0 * si * a_tilde
        if vl * dv <= -2.0 * si * a_tilde:
            acah = vi * vi * a_tilde / denom if denom != 0.0 else 0.0
        else:
            closing = dv * dv if dv > 0.0 else 0.0
            acah = a_tilde - closing / (2.0 * si)
        if acc < acah:
            ci = coolness[i]
            acc = (1.0 - ci) * acc + ci * (acah + bi * np.tanh((acc - acah) / bi))
        if acc < -hard_decel:
            acc = -hard_decel
        elif acc > ai:
            acc = ai
        out[i] = acc
    return out


@njit(cache=True)
def advance(positions, speeds, accel, dt, bound, circumference):
    """Kinematic step identical to world.advance_world."""
    n = positions.shape[0]
    new_pos = np.empty(n)
    new_v = np.empty(n)
    for i in range(n):
        ai = accel[i]
        if ai < -bound:
            ai = -bound
        elif ai > bound:
            ai = bound
        vn = speeds[i] + ai * dt
        if vn < 0.0:
            vn = 0.0
        new_pos[i] = (positions[i] + 0.5 * (speeds[i] + vn) * dt) % circumference
        new_v[i] = vn
    return new_pos, new_v
