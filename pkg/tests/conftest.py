"""Shared generators and independent reference implementations.

The references below are written from the definitions with plain loops so
they share no code with the package.
"""
import itertools
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fairassort.instance import Instance

settings.register_profile(
    "repo", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))


def random_instance(rng, n_range=(2, 8), k_max=4, kind="general", delta=None):
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    K = int(rng.integers(1, min(k_max, n) + 1))
    r = rng.uniform(0.1, 1.0, n)
    w = rng.uniform(0.1, 2.0, n)
    q = rng.uniform(0.1, 1.0, n)
    if kind == "general":
        a, b = rng.uniform(0, 1, n), rng.uniform(0, 1, n)
    elif kind == "revenue":  # b = 0
        a, b = rng.uniform(0, 1, n), np.zeros(n)
    elif kind == "visibility":
        a, b = np.zeros(n), np.ones(n)
    elif kind == "uniform":  # visibility with equal revenues
        a, b = np.zeros(n), np.ones(n)
        r = np.full(n, rng.uniform(0.3, 1.0))
    else:
        raise ValueError(kind)
    if delta is None:
        delta = float(rng.choice([0.0, 0.1, 1.0]))
    return Instance(K, delta, a, b, r, w, q)


def random_z(rng, n, hi=0.5):
    z = rng.uniform(0, hi, (n, n))
    np.fill_diagonal(z, 0.0)
    return z


def ref_rev(inst, S):
    num = sum(inst.r[i] * inst.w[i] for i in S)
    return num / (1.0 + sum(inst.w[i] for i in S))


def ref_outcome(inst, i, S):
    return inst.a[i] * inst.w[i] / (1.0 + sum(inst.w[j] for j in S)) + inst.b[i]


def ref_rev_cost(inst, S, z):
    """rev(S) minus sum_{i in S} O_i(S) c_i(z), with c_i = sum_j (z_ij - z_ji) q_j."""
    n = inst.n
    total = ref_rev(inst, S)
    for i in S:
        c = sum((z[i][j] - z[j][i]) * inst.q[j] for j in range(n) if j != i)
        total -= ref_outcome(inst, i, S) * c
    return total


def ref_subdual(inst, z):
    best, best_S = 0.0, ()
    for k in range(1, inst.K + 1):
        for S in itertools.combinations(range(inst.n), k):
            v = ref_rev_cost(inst, S, z)
            if v > best + 1e-15:
                best, best_S = v, S
    return best_S, best


def ref_fair_lp(inst):
    """FAIR over every assortment with scipy as an independent LP engine."""
    from scipy.optimize import linprog

    n = inst.n
    sets = [S for k in range(1, inst.K + 1) for S in itertools.combinations(range(n), k)]
    c = -np.array([ref_rev(inst, S) for S in sets])
    rows, rhs = [], []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            row = []
            for S in sets:
                oi = ref_outcome(inst, i, S) if i in S else 0.0
                oj = ref_outcome(inst, j, S) if j in S else 0.0
                row.append(oi / inst.q[i] - oj / inst.q[j])
            rows.append(row)
            rhs.append(inst.delta)
    rows.append([1.0] * len(sets))
    rhs.append(1.0)
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=(0, None), method="highs")
    assert res.status == 0
    return -res.fun, dict(zip(sets, res.x))


def ref_kp(u, w, W, K, items=None):
    """Integer knapsack with cardinality cap, by enumeration."""
    items = range(len(u)) if items is None else list(items)
    best = 0.0
    for k in range(1, K + 1):
        for S in itertools.combinations(items, k):
            if sum(w[i] for i in S) <= W + 1e-12:
                best = max(best, sum(u[i] for i in S))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
