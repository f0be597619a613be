"""Exact pricing when outcomes carry no intercept (b = 0).

Then rev_cost(S) = sum r~_i w_i / (1 + w(S)) is a capacitated MNL revenue.
Its optimum lam* is the root of

    g(lam) = max_{|S| <= K} sum_{i in S} w_i (r~_i - lam) - lam,

which is evaluated by summing the K largest positive terms. g drops with
slope at most -1, so bisection is safe.
"""
from __future__ import annotations

import numpy as np

from ..errors import InputError
from ..instance import Instance, OracleResult, post_fairness, rev_cost


def _g(lam, rt, w, K):
    t = w * (rt - lam)
    t = t[t > 0]
    if t.size > K:
        t = np.partition(t, t.size - K)[-K:]
    return float(t.sum()) - lam


def _top_set(lam, rt, w, K):
    t = w * (rt - lam)
    idx = np.arange(t.size)
    order = idx[np.lexsort((idx, -t))]
    return tuple(sorted(int(i) for i in order[:K] if t[i] > 0))


def _mnl_value(S, rt, w):
    if not S:
        return 0.0
    S = list(S)
    return float(np.dot(rt[S], w[S]) / (1.0 + w[S].sum()))


def capacitated_mnl(rt, w, K, tol=1e-12):
    """(best set, lam*) for max_{|S|<=K} sum rt_i w_i / (1 + w(S))."""
    rt = np.asarray(rt, float)
    w = np.asarray(w, float)
    if rt.size == 0 or rt.max() <= 0:
        return (), 0.0
    lo, hi = 0.0, float(rt.max())
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _g(mid, rt, w, K) > 0:
            lo = mid
        else:
            hi = mid
    # read the set off on both sides of the bracket and keep the better one
    cands = {_top_set(lam, rt, w, K) for lam in (lo, hi, 0.5 * (lo + hi))}
    best = max(cands, key=lambda S: (_mnl_value(S, rt, w), tuple(-i for i in S)))
    return best, 0.5 * (lo + hi)


def exact_oracle(inst: Instance, z):
    """Exact when the fixed costs b_i c_i(z) all vanish: b = 0, or z = 0."""
    pf = post_fairness(inst, z)
    if np.any(pf.fixed_cost != 0):
        raise InputError("the exact oracle needs b = 0 (or a z with zero fixed costs)")
    S, lam = capacitated_mnl(pf.revenue, inst.w, inst.K)
    return OracleResult(S, rev_cost(inst, S, z), "exact", stats={"lambda": lam})
