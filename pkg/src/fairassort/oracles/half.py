"""The 1/2-approximation family.

``half_core`` runs the profile-tracking procedure on one well-behaving
interval. It covers both the plain version (all live items, cardinality K)
and the sub-knapsack version used inside the PTAS (items restricted to a
set ``pool``, cardinality ``budget`` and a weight offset for the items
already committed).
"""
from __future__ import annotations

import numpy as np

from ..errors import InputError, NumericalError
from ..instance import Instance
from ..lp import kp_relax_solve
from .view import KnapsackView, best_result, breakpoints, make_view

FRAC_TOL = 1e-9


class SwapStats:
    __slots__ = ("max_swaps", "total_swaps", "intervals", "lp_calls")

    def __init__(self):
        self.max_swaps = 0
        self.total_swaps = 0
        self.intervals = 0
        self.lp_calls = 0

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__slots__}


def _mask(items):
    m = 0
    for i in items:
        m |= 1 << int(i)
    return m


def half_core(view: KnapsackView, lo, hi, closed, pool=None, budget=None, offset=0.0,
              sub=False, stats=None):
    """Candidate collection for max over W in [lo, hi) of the (sub-)knapsack.

    ``pool`` is an index array of eligible items (default: all live items).
    ``sub`` selects the sub-knapsack variant: its profile initialization
    compares with ``<=`` and its relaxation uses capacity W - offset.
    Returns a list of bitmasks over view positions.
    """
    w = view.w
    n_all = view.n
    pool = np.arange(n_all) if pool is None else np.asarray(pool, dtype=int)
    budget = view.K if budget is None else int(budget)
    coll = []
    if budget <= 0 or pool.size == 0:
        return coll
    if sub:
        # the plain version's singletons are interval-free; the caller adds them once
        coll.extend(1 << int(i) for i in pool)

    mid = 0.5 * (lo + hi)
    u_mid = view.u(mid)[pool]
    ratio = u_mid / w[pool]
    # descending ratio, ties to the smaller index
    order = pool[np.lexsort((pool, -ratio))]
    d = min(pool.size, budget)
    H = order[:d]
    W_TH = float(w[H].sum()) + offset

    if lo < W_TH:
        m = 0
        for h in H:
            m |= 1 << int(h)
            coll.append(m)
        u_hd = float(view.u(W_TH)[H[-1]])
        if not (u_hd >= 0 and d == budget):
            return coll

    high_nonempty = hi > W_TH or (closed and hi >= W_TH)
    if not high_nonempty:
        return coll

    init_from_top = lo <= W_TH if sub else lo < W_TH
    if init_from_top:
        P1 = set(int(h) for h in H)
        W_next = W_TH
    else:
        u_lo = view.u(lo)[pool]
        sol = kp_relax_solve(u_lo, w[pool], lo - offset, budget)
        if stats is not None:
            stats.lp_calls += 1
        x = sol.x
        ones = set(int(pool[k]) for k in np.flatnonzero(x >= 1 - FRAC_TOL))
        frac = [int(pool[k]) for k in np.flatnonzero((x > FRAC_TOL) & (x < 1 - FRAC_TOL))]
        frac.sort(key=lambda i: (w[i], i))
        if len(frac) > 2:
            raise NumericalError(f"relaxation returned {len(frac)} fractional items")
        if frac:
            heavy = frac[-1]
            light = [frac[0]] if len(frac) == 2 else []
            coll.append(_mask(ones | set(light)))
            coll.append(_mask(ones | {heavy}))
            P1 = ones | {heavy}
        else:
            coll.append(_mask(ones))
            P1 = set(ones)
        W_next = float(w[list(P1)].sum()) + offset if P1 else offset

    swaps = _swap_loop(view, pool, P1, W_next, hi, closed, coll)
    if stats is not None:
        stats.max_swaps = max(stats.max_swaps, swaps)
        stats.total_swaps += swaps
    return coll


def _swap_loop(view, pool, P1, W_next, hi, closed, coll):
    w = view.w
    cap = 4 * view.n * max(view.K, 1)
    in1 = np.zeros(view.n, bool)
    in1[list(P1)] = True
    pool_mask = np.zeros(view.n, bool)
    pool_mask[pool] = True
    swaps = 0
    mask = _mask(P1)
    while True:
        I = np.flatnonzero(in1)
        J = np.flatnonzero(pool_mask & ~in1)
        if I.size == 0 or J.size == 0:
            break
        dw = w[J][None, :] - w[I][:, None]
        ok = dw > 0
        if not ok.any():
            break
        u = view.u(W_next)
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(ok, (u[J][None, :] - u[I][:, None]) / np.where(ok, dw, 1.0), -np.inf)
        # I and J are increasing, so the first flat argmax is the smallest (i, j)
        k = int(np.argmax(slope))
        a, b = divmod(k, J.size)
        i_s, j_s = int(I[a]), int(J[b])
        past = W_next > hi if closed else W_next >= hi
        if past or u[i_s] > u[j_s]:
            break
        in1[i_s], in1[j_s] = False, True
        mask ^= (1 << i_s) | (1 << j_s)
        W_next += w[j_s] - w[i_s]
        coll.append(mask)
        swaps += 1
        if swaps > cap:
            raise NumericalError(f"swap loop exceeded its cap of {cap}")
    return swaps


def half_approx_interval(view: KnapsackView, lo, hi, closed=False, stats=None):
    """Collection for one well-behaving interval (bitmasks over view items)."""
    return [1 << i for i in range(view.n)] + half_core(view, lo, hi, closed, stats=stats)


def half_approx(inst: Instance, z, keep_collection=False):
    """1/2-approximate separation: best set over all well-behaving intervals."""
    view = make_view(inst, z)
    stats = SwapStats()
    masks = set()
    if view.n:
        masks.update(1 << i for i in range(view.n))
        part = breakpoints(view)
        for lo, hi, closed in part.intervals:
            stats.intervals += 1
            masks.update(half_core(view, lo, hi, closed, stats=stats))
    return best_result(inst, z, view, masks, "half", keep_collection, stats.as_dict())


def uniform_half_approx(inst: Instance, z, keep_collection=False):
    """1/2-approximation for uniform revenues and visibility outcomes, on [0, inf) directly."""
    if not (inst.is_visibility_fair and inst.uniform_revenue):
        raise InputError("uniform_half_approx needs a visibility instance with equal revenues")
    view = make_view(inst, z)
    stats = SwapStats()
    masks = _uniform_collection(view, float(inst.r[0]), stats)
    return best_result(inst, z, view, masks, "uniform-half", keep_collection, stats.as_dict())


def _uniform_collection(view: KnapsackView, r, stats):
    n, K = view.n, view.K
    w, ct = view.w, view.ct
    coll = [1 << i for i in range(n)]
    if n == 0:
        return coll
    idx = np.arange(n)
    # u_i/w_i = r/(1+W) - c~_i/w_i, so the ranking is W-free
    order = idx[np.lexsort((idx, ct / w))]
    d = min(n, K)
    H = order[:d]
    m = 0
    for h in H:
        m |= 1 << int(h)
        coll.append(m)
    W_TH = float(w[H].sum())
    if not (view.u(W_TH)[H[-1]] >= 0 and d == K):
        return coll
    in1 = np.zeros(n, bool)
    in1[H] = True
    W_next = W_TH
    cap = 4 * n * K
    swaps = 0
    while True:
        I = np.flatnonzero(in1)
        J = np.flatnonzero(~in1)
        if I.size == 0 or J.size == 0:
            break
        dw = w[J][None, :] - w[I][:, None]
        ok = dw > 0
        if not ok.any():
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(ok, (ct[J][None, :] - ct[I][:, None]) / np.where(ok, dw, 1.0), np.inf)
        k = int(np.argmin(slope))
        a, b = divmod(k, J.size)
        i_s, j_s = int(I[a]), int(J[b])
        W_next += w[j_s] - w[i_s]
        in1[i_s], in1[j_s] = False, True
        m ^= (1 << i_s) | (1 << j_s)
        swaps += 1
        if swaps > cap:
            raise NumericalError(f"swap loop exceeded its cap of {cap}")
        if slope[a, b] <= r / (1.0 + W_next):
            coll.append(m)
        else:
            break
    stats.max_swaps = max(stats.max_swaps, swaps)
    stats.total_swaps += swaps
    stats.intervals = 1
    return coll


def small_items(view: KnapsackView, L, mid):
    """Items outside L whose utility never exceeds the smallest utility in L."""
    u = view.u(mid)
    L = np.asarray(L, dtype=int)
    floor = u[L].min()
    outside = np.ones(view.n, bool)
    outside[L] = False
    return np.flatnonzero(outside & (u <= floor))


def modified_half_approx(view: KnapsackView, L, pool, lo, hi, closed=False, stats=None):
    """Collection for the sub-knapsack on ``pool`` after committing L (bitmasks, L excluded)."""
    L = list(L)
    budget = view.K - len(L)
    pool = np.asarray(pool, dtype=int)
    if budget <= 0 or pool.size == 0:
        return [0]
    offset = float(view.w[L].sum()) if L else 0.0
    coll = half_core(view, lo, hi, closed, pool=pool, budget=budget, offset=offset, sub=True, stats=stats)
    coll.append(0)
    return coll
