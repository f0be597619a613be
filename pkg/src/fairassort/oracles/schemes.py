"""Approximation schemes: the PTAS (general instances) and the FPTAS
(visibility outcomes with equal revenues)."""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..errors import InputError
from ..instance import Instance
from .half import SwapStats, modified_half_approx, small_items
from .view import best_result, breakpoints, dedup, make_view


def ptas_size(eps, K):
    """l = min(ceil(1/eps - 2), K), floored at 1."""
    ell = math.ceil(1.0 / eps - 2.0 - 1e-12)
    return max(1, min(ell, K))


def ptas(inst: Instance, z, epsilon=0.25, keep_collection=False):
    if not 0 < epsilon < 1:
        raise InputError("epsilon must lie in (0, 1)")
    view = make_view(inst, z)
    n, K = view.n, view.K
    ell = ptas_size(epsilon, K)
    stats = SwapStats()
    masks = set()
    if n == 0:
        return best_result(inst, z, view, masks, f"ptas:{epsilon:g}", keep_collection, stats.as_dict())
    w = view.w
    # small sets: the weight filter is w(L) <= W_max, and W_max reaches W_cap
    for size in range(1, ell):
        for L in itertools.combinations(range(n), size):
            m = 0
            for i in L:
                m |= 1 << i
            masks.add(m)
    large = list(itertools.combinations(range(n), ell)) if ell <= n else []
    L_arr = np.array(large, dtype=int).reshape(len(large), ell)
    L_w = w[L_arr].sum(axis=1) if len(large) else np.zeros(0)
    L_masks = [sum(1 << i for i in L) for L in large]
    for lo, hi, closed in breakpoints(view).intervals:
        stats.intervals += 1
        mid = 0.5 * (lo + hi)
        u_mid = view.u(mid)
        for k in np.flatnonzero(L_w <= hi):
            L = L_arr[k]
            floor = u_mid[L].min()
            outside = np.ones(n, bool)
            outside[L] = False
            pool = np.flatnonzero(outside & (u_mid <= floor))
            base = L_masks[k]
            for m in modified_half_approx(view, L, pool, lo, hi, closed, stats):
                masks.add(base | m)
    return best_result(inst, z, view, masks, f"ptas:{epsilon:g}", keep_collection, stats.as_dict())


def fptas_breakpoints(view, r):
    """Change points of the eligible set: item weights and utility sign roots."""
    pts = list(view.w)
    pos = view.ct > 0
    pts.extend(r * view.w[pos] / view.ct[pos] - 1.0)
    return dedup(pts, 0.0, view.W_cap)


def chi_max(K, eps):
    return math.ceil(K * K / eps - 1e-12) + K


def fptas(inst: Instance, z, epsilon=0.2, keep_collection=False):
    if not (inst.is_visibility_fair and inst.uniform_revenue):
        raise InputError("fptas needs a visibility instance with equal revenues")
    if not 0 < epsilon < 1:
        raise InputError("epsilon must lie in (0, 1)")
    view = make_view(inst, z)
    r = float(inst.r[0])
    masks = set()
    n_int = 0
    if view.n:
        pts = np.concatenate([[0.0], fptas_breakpoints(view, r), [view.W_cap]])
        pieces = [(float(pts[k]), float(pts[k + 1]), None) for k in range(len(pts) - 1)]
        # W_cap itself is a change point (the heaviest item may only fit there)
        pieces.append((view.W_cap, view.W_cap, view.W_cap))
        for lo, hi, at in pieces:
            n_int += 1
            masks.update(_fptas_interval(view, lo, hi, epsilon, at))
    return best_result(inst, z, view, masks, f"fptas:{epsilon:g}", keep_collection, {"intervals": n_int})


def _fptas_interval(view, lo, hi, eps, at=None):
    K = view.K
    mid = 0.5 * (lo + hi) if at is None else at
    u_lo = view.u(lo)
    eligible = np.flatnonzero((view.w <= mid) & (view.u(mid) >= 0))
    if eligible.size == 0:
        return []
    U = float(u_lo[eligible].max())
    if U <= 0:
        # every eligible utility is zero at the left end; nothing to scale
        return [1 << int(i) for i in eligible]
    cmax = chi_max(K, eps)
    scaled = np.ceil(u_lo[eligible] * K / (U * eps) - 1e-12).astype(int)
    scaled = np.maximum(scaled, 0)
    # min-weight table with an explicit reachability mask
    wt = np.zeros((cmax + 1, K + 1))
    reach = np.zeros((cmax + 1, K + 1), bool)
    reach[0, 0] = True
    takes = []
    for idx, i in enumerate(eligible):
        ui, wi = int(scaled[idx]), float(view.w[i])
        take = np.zeros_like(reach)
        if ui <= cmax:
            src_r = reach[: cmax + 1 - ui, :K]
            src_w = wt[: cmax + 1 - ui, :K] + wi
            dst_r = reach[ui:, 1:]
            dst_w = wt[ui:, 1:]
            better = src_r & (~dst_r | (src_w < dst_w))
            take[ui:, 1:] = better
            dst_w[better] = src_w[better]
            dst_r |= better
        takes.append(take)
    out = []
    for chi, kappa in zip(*np.nonzero(reach & (wt <= hi))):
        m = 0
        c, k = int(chi), int(kappa)
        for idx in range(len(eligible) - 1, -1, -1):
            if takes[idx][c, k]:
                m |= 1 << int(eligible[idx])
                c -= int(scaled[idx])
                k -= 1
        out.append(m)
    return out
