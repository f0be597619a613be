"""Knapsack view of the pricing problem and its well-behaving partition.

For a dual point z the pricing problem is a family of knapsacks indexed by
a capacity W, with item utilities u_i(W) = r~_i w_i / (1 + W) - c~_i. All
the orderings the approximation algorithms rely on are linear in
s = 1 / (1 + W), so every change point is the root of a linear equation.

Sets are carried as Python int bitmasks over the view's live items.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..instance import Instance, OracleResult, post_fairness, rev_cost

DEDUP_TOL = 1e-10


@dataclass(frozen=True)
class KnapsackView:
    rt: np.ndarray  # post-fairness revenue r~ of live items
    ct: np.ndarray  # post-fairness fixed cost c~ of live items
    w: np.ndarray
    K: int
    ids: np.ndarray  # live position -> original item index

    @property
    def n(self):
        return self.w.size

    @property
    def W_cap(self):
        return float(self.w.sum())

    def u(self, W):
        return self.rt * self.w / (1.0 + W) - self.ct

    def mask_weight(self, mask):
        return float(self.w[mask_items(mask)].sum()) if mask else 0.0


def make_view(inst: Instance, z, keep_all=False) -> KnapsackView:
    """Drop items with r~ <= 0 and c~ >= 0; they can only lower rev_cost."""
    pf = post_fairness(inst, z)
    rt, ct = pf.revenue, pf.fixed_cost
    live = np.ones(inst.n, bool) if keep_all else ~((rt <= 0) & (ct >= 0))
    ids = np.flatnonzero(live)
    return KnapsackView(rt[ids], ct[ids], inst.w[ids], inst.K, ids)


def mask_items(mask):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def items_mask(items):
    m = 0
    for i in items:
        m |= 1 << int(i)
    return m


def masks_to_incidence(masks, n):
    masks = list(masks)
    if n <= 62:
        arr = np.array(masks, dtype=np.int64)
        return ((arr[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(float)
    M = np.zeros((len(masks), n))
    for k, m in enumerate(masks):
        M[k, mask_items(m)] = 1.0
    return M


def evaluate_masks(view: KnapsackView, masks):
    """rev_cost of each set, computed from the view's arrays."""
    M = masks_to_incidence(masks, view.n)
    return (M @ (view.rt * view.w)) / (1.0 + M @ view.w) - M @ view.ct


def best_result(inst: Instance, z, view: KnapsackView, masks, method, keep_collection=False, stats=None):
    """Argmax of rev_cost over ``masks`` plus the empty set, ties to the lexicographically smallest set."""
    masks = set(masks)
    masks.add(0)
    masks = sorted(masks)
    vals = evaluate_masks(view, masks)
    best = vals.max()
    tied = [masks[k] for k in np.flatnonzero(vals == best)]
    chosen = min(tied, key=lambda m: tuple(int(view.ids[i]) for i in mask_items(m)))
    items = tuple(int(view.ids[i]) for i in mask_items(chosen))
    if len(items) > inst.K:
        raise AssertionError(f"oracle produced a set of size {len(items)} > K")
    value = rev_cost(inst, items, z)
    coll = None
    if keep_collection:
        coll = [tuple(int(view.ids[i]) for i in mask_items(m)) for m in masks]
    st = dict(stats or {})
    st["candidates"] = len(masks)
    return OracleResult(items, value, method, coll, st)


# -- breakpoints -------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    breakpoints: np.ndarray  # interior change points, sorted
    W_cap: float

    @property
    def intervals(self):
        """Consecutive [lo, hi) pieces; the last one is closed at W_cap."""
        pts = np.concatenate([[0.0], self.breakpoints, [self.W_cap]])
        out = []
        for k in range(len(pts) - 1):
            out.append((float(pts[k]), float(pts[k + 1]), k == len(pts) - 2))
        return out


def _roots_to_W(coef, const):
    """Solve coef * s = const for s in (0, 1]; return W = 1/s - 1."""
    coef = np.asarray(coef, float)
    const = np.asarray(const, float)
    ok = coef != 0
    s = np.full(coef.shape, np.nan)
    # near-zero coef or s overflows to inf; such roots are no breakpoints
    with np.errstate(over="ignore", divide="ignore"):
        s[ok] = const[ok] / coef[ok]
        s = s[ok & np.isfinite(s)]
        s = s[(s > 0) & (s <= 1)]
        W = 1.0 / s - 1.0
    return W[np.isfinite(W)]


def _triples(n):
    if n < 3:
        return np.zeros((0, 3), dtype=int)
    return np.array(list(itertools.combinations(range(n), 3)), dtype=int)


def condition_roots(view: KnapsackView):
    """All raw roots of the four ordering conditions, by kind."""
    rt, ct, w = view.rt, view.ct, view.w
    n = view.n
    rw = rt * w
    out = {}
    # (i) sign of u_i
    out["sign"] = _roots_to_W(rw, ct)
    iu, ju = np.triu_indices(n, 1)
    # (ii) u_i = u_j
    out["utility"] = _roots_to_W(rw[iu] - rw[ju], ct[iu] - ct[ju])
    # (iii) u_i / w_i = u_j / w_j
    out["ratio"] = _roots_to_W(rt[iu] - rt[ju], ct[iu] / w[iu] - ct[ju] / w[ju])
    # (iv) slope order among pairs sharing an item = collinearity of (w, u) triples
    T = _triples(n)
    if len(T):
        i, j, k = T[:, 0], T[:, 1], T[:, 2]
        distinct = (w[i] != w[j]) & (w[j] != w[k]) & (w[i] != w[k])
        i, j, k = i[distinct], j[distinct], k[distinct]
        coef = (rw[j] - rw[i]) * (w[k] - w[i]) - (rw[k] - rw[i]) * (w[j] - w[i])
        const = (ct[j] - ct[i]) * (w[k] - w[i]) - (ct[k] - ct[i]) * (w[j] - w[i])
        out["slope"] = _roots_to_W(coef, const)
    else:
        out["slope"] = np.zeros(0)
    return out


def dedup(points, lo, hi, tol=DEDUP_TOL):
    pts = np.sort(np.asarray(points, float))
    pts = pts[(pts > lo + tol) & (pts < hi - tol)]
    if pts.size == 0:
        return pts
    keep = np.concatenate([[True], np.diff(pts) > tol])
    return pts[keep]


def breakpoints(view: KnapsackView) -> Partition:
    """Partition [0, W_cap] into well-behaving intervals."""
    roots = condition_roots(view)
    allr = np.concatenate(list(roots.values())) if roots else np.zeros(0)
    return Partition(dedup(allr, 0.0, view.W_cap), view.W_cap)


def breakpoint_bound(n):
    return n + 2 * n * n + n**3


def orderings(view: KnapsackView, W):
    """Signature of the four orderings (signs, utilities, ratios, slopes) at capacity W."""
    u = view.u(W)
    w = view.w
    signs = tuple(np.sign(u).astype(int))
    util_order = tuple(np.argsort(-u, kind="stable"))
    ratio_order = tuple(np.argsort(-(u / w), kind="stable"))
    slopes = []
    for i in range(view.n):
        others = [j for j in range(view.n) if w[j] != w[i]]
        sl = [(u[j] - u[i]) / (w[j] - w[i]) for j in others]
        slopes.append(tuple(others[k] for k in np.argsort(sl, kind="stable")))
    return signs, util_order, ratio_order, tuple(slopes)
