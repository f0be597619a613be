"""Problem instances, MNL arithmetic, fairness evaluation and brute force.

Items are indexed from 0 internally. An assortment is a sorted tuple of
distinct item indices. A randomized assortment plan is a
:class:`DistributionSolution` mapping assortments to probabilities.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .errors import CapacityError, InputError, NumericalError
from .lp import LpProblem, lp_solve

ENUMERATION_CAP = 10**6
FEAS_TOL = 1e-6


def _frozen(x, n=None, name="vector"):
    arr = np.array(x, dtype=float).reshape(-1)
    if n is not None and arr.size != n:
        raise InputError(f"{name} must have length {n}, got {arr.size}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """Problem data: outcome parameters a, b, revenues r, MNL weights w, qualities q."""

    K: int
    delta: float
    a: np.ndarray
    b: np.ndarray
    r: np.ndarray
    w: np.ndarray
    q: np.ndarray
    ids: tuple = ()

    def __post_init__(self):
        w = _frozen(self.w, name="w")
        n = w.size
        if n < 1:
            raise InputError("an instance needs at least one item")
        for name in ("a", "b", "r", "q"):
            object.__setattr__(self, name, _frozen(getattr(self, name), n, name))
        object.__setattr__(self, "w", w)
        if not all(np.all(np.isfinite(getattr(self, f))) for f in ("a", "b", "r", "w", "q")):
            raise InputError("instance data must be finite")
        if np.any(self.w <= 0) or np.any(self.r <= 0) or np.any(self.q <= 0):
            raise InputError("w, r and q must be positive")
        if np.any(self.a < 0) or np.any(self.b < 0):
            raise InputError("a and b must be nonnegative")
        if int(self.K) != self.K or not 1 <= self.K <= n:
            raise InputError(f"K must be an integer in [1, {n}]")
        object.__setattr__(self, "K", int(self.K))
        if not np.isfinite(self.delta) or self.delta < 0:
            raise InputError("delta must be a finite nonnegative number")
        object.__setattr__(self, "delta", float(self.delta))
        ids = tuple(self.ids) if len(self.ids) else tuple(str(i + 1) for i in range(n))
        if len(ids) != n or len(set(ids)) != n:
            raise InputError("item ids must be unique, one per item")
        object.__setattr__(self, "ids", ids)

    @property
    def n(self):
        return self.w.size

    @property
    def rbar(self):
        return float(self.r.max())

    # classification
    @property
    def is_revenue_fair(self):
        """b = 0: revenue or market-share outcomes."""
        return bool(np.all(self.b == 0))

    @property
    def is_visibility_fair(self):
        return bool(np.all(self.a == 0))

    @property
    def uniform_revenue(self):
        return bool(np.all(self.r == self.r[0]))

    def with_delta(self, delta):
        return Instance(self.K, delta, self.a, self.b, self.r, self.w, self.q, self.ids)


def visibility_instance(r, w, q, K, delta=0.0, ids=()):
    """Outcome = visibility (a = 0, b = 1)."""
    n = len(w)
    return Instance(K, delta, np.zeros(n), np.ones(n), r, w, q, ids)


def assortment(items, n=None):
    """Normalize to a sorted tuple, rejecting duplicates and bad indices."""
    s = tuple(sorted(int(i) for i in items))
    if len(set(s)) != len(s):
        raise InputError(f"duplicate items in assortment {s}")
    if s and (s[0] < 0 or (n is not None and s[-1] >= n)):
        raise InputError(f"item index out of range in {s}")
    return s


@dataclass
class DistributionSolution:
    """Sparse distribution over assortments."""

    support: dict
    objective: float

    def items(self):
        return sorted(self.support.items())

    def pruned_size(self, threshold=1e-3):
        return sum(1 for p in self.support.values() if p > threshold)

    def total_mass(self):
        return float(sum(self.support.values()))


@dataclass(frozen=True)
class DualPoint:
    z: np.ndarray
    rho: float


@dataclass(frozen=True)
class PostFairness:
    cost: np.ndarray
    revenue: np.ndarray
    fixed_cost: np.ndarray


@dataclass(frozen=True)
class FairnessVerdict:
    passed: bool
    pair: tuple | None
    slack: float
    outcomes: np.ndarray = field(repr=False, default=None)


def _check(inst: Instance, s):
    s = assortment(s, inst.n)
    return s


def rev(inst: Instance, s) -> float:
    """Expected MNL revenue of offering assortment ``s``."""
    s = list(_check(inst, s))
    if not s:
        return 0.0
    w = inst.w[s]
    return float(np.dot(inst.r[s], w) / (1.0 + w.sum()))


def outcome(inst: Instance, i: int, s) -> float:
    """O_i(S) = a_i w_i / (1 + w(S)) + b_i, defined for i in S."""
    s = _check(inst, s)
    if i not in s:
        raise InputError(f"item {i} is not in assortment {s}")
    return float(inst.a[i] * inst.w[i] / (1.0 + inst.w[list(s)].sum()) + inst.b[i])


def outcome_vector(inst: Instance, s) -> np.ndarray:
    """Length-n vector with O_i(S) on S and 0 elsewhere."""
    out = np.zeros(inst.n)
    s = list(s)
    if s:
        W = inst.w[s].sum()
        out[s] = inst.a[s] * inst.w[s] / (1.0 + W) + inst.b[s]
    return out


def expected_outcomes(inst: Instance, sol: DistributionSolution) -> np.ndarray:
    O = np.zeros(inst.n)
    for s, p in sol.support.items():
        O += p * outcome_vector(inst, _check(inst, s))
    return O


def fairness_check(inst: Instance, sol: DistributionSolution, tol: float = FEAS_TOL) -> FairnessVerdict:
    """Worst pairwise gap O_i/q_i - O_j/q_j - delta over ordered pairs."""
    O = expected_outcomes(inst, sol)
    norm = O / inst.q
    gap = norm[:, None] - norm[None, :] - inst.delta
    np.fill_diagonal(gap, -np.inf)
    if inst.n == 1:
        return FairnessVerdict(True, None, -np.inf, O)
    flat = int(np.argmax(gap))
    i, j = divmod(flat, inst.n)
    worst = float(gap[i, j])
    return FairnessVerdict(worst <= tol, (i, j), worst, O)


def singleton_fallback(inst: Instance) -> DistributionSolution:
    """p({i}) proportional to q_i / O_i({i}); feasible at every delta >= 0.

    If some item has identically zero outcome, the mass goes to those items instead.
    """
    o = np.array([outcome(inst, i, (i,)) for i in range(inst.n)])
    dead = o == 0
    # items with a = b = 0 never earn an outcome; showing only them is trivially fair
    weights = dead.astype(float) if dead.any() else inst.q / o
    p = weights / weights.sum()
    support = {(i,): float(p[i]) for i in range(inst.n)}
    obj = sum(p[i] * rev(inst, (i,)) for i in range(inst.n))
    return DistributionSolution(support, float(obj))


def post_fairness(inst: Instance, z) -> PostFairness:
    """Per-item dual cost c_i(z) and the induced r~, c~."""
    z = np.asarray(z, dtype=float)
    if z.shape != (inst.n, inst.n):
        raise InputError(f"z must be {inst.n}x{inst.n}")
    z = z.copy()
    np.fill_diagonal(z, 0.0)
    c = z @ inst.q - z.T @ inst.q
    return PostFairness(c, inst.r - inst.a * c, inst.b * c)


def rev_cost(inst: Instance, s, z) -> float:
    """Cost-adjusted revenue sum r~_i w_i / (1 + w(S)) - sum c~_i."""
    s = list(_check(inst, s))
    if not s:
        return 0.0
    pf = post_fairness(inst, z)
    w = inst.w[s]
    return float(np.dot(pf.revenue[s], w) / (1.0 + w.sum()) - pf.fixed_cost[s].sum())


def rev_cost_direct(inst: Instance, s, z) -> float:
    """Same quantity written as rev(S) - sum_{i in S} O_i(S) c_i(z)."""
    s = _check(inst, s)
    c = post_fairness(inst, z).cost
    return rev(inst, s) - float(np.dot(outcome_vector(inst, s), c))


def count_assortments(n, K):
    return sum(comb(n, k) for k in range(K + 1))


@lru_cache(maxsize=32)
def _incidence(n, K):
    rows = [s for k in range(K + 1) for s in itertools.combinations(range(n), k)]
    M = np.zeros((len(rows), n))
    for idx, s in enumerate(rows):
        M[idx, list(s)] = 1.0
    M.setflags(write=False)
    return tuple(rows), M


def enumerate_assortments(n, K, cap=ENUMERATION_CAP, include_empty=True):
    total = count_assortments(n, K)
    if total > cap:
        raise CapacityError(f"{total} assortments exceed the enumeration cap {cap}")
    rows, M = _incidence(n, K)
    if include_empty:
        return rows, M
    return rows[1:], M[1:]


@dataclass
class OracleResult:
    """Set returned by a separation oracle, in original item indices."""

    items: tuple
    value: float
    method: str = ""
    collection: list | None = None
    stats: dict = field(default_factory=dict)


def brute_force_subdual(inst: Instance, z, cap=ENUMERATION_CAP) -> OracleResult:
    """Exact max of rev_cost over all |S| <= K by enumeration (empty set allowed)."""
    rows, M = enumerate_assortments(inst.n, inst.K, cap)
    pf = post_fairness(inst, z)
    vals = (M @ (pf.revenue * inst.w)) / (1.0 + M @ inst.w) - M @ pf.fixed_cost
    best = vals.max()
    ties = np.flatnonzero(vals == best)
    k = min(ties, key=lambda t: rows[t])
    return OracleResult(rows[k], float(vals[k]), "brute", stats={"evaluated": len(rows)})


# -- the fair LP -------------------------------------------------------------

def fairness_pairs(n):
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def fair_column(inst: Instance, s) -> np.ndarray:
    """Constraint column of p(S): one entry per ordered pair, then the mass row."""
    o = outcome_vector(inst, s)
    G = np.outer(o, inst.q) - np.outer(inst.q, o)
    off = ~np.eye(inst.n, dtype=bool)
    return np.concatenate([G[off], [1.0]])


def fair_rhs(inst: Instance) -> np.ndarray:
    Q = inst.delta * np.outer(inst.q, inst.q)
    off = ~np.eye(inst.n, dtype=bool)
    return np.concatenate([Q[off], [1.0]])


def fair_lp(inst: Instance, columns) -> LpProblem:
    """FAIR restricted to ``columns``; rows are q_j O_i - q_i O_j <= delta q_i q_j and sum p <= 1."""
    cols = [assortment(s, inst.n) for s in columns]
    A = np.column_stack([fair_column(inst, s) for s in cols]) if cols else np.zeros((inst.n * (inst.n - 1) + 1, 0))
    c = np.array([rev(inst, s) for s in cols])
    m = A.shape[0]
    return LpProblem(c, A, ("<=",) * m, fair_rhs(inst), np.zeros(len(cols)), np.full(len(cols), np.inf))


def dual_from_rows(inst: Instance, duals) -> DualPoint:
    n = inst.n
    z = np.zeros((n, n))
    off = ~np.eye(n, dtype=bool)
    z[off] = np.maximum(duals[:-1], 0.0)
    return DualPoint(z, float(max(duals[-1], 0.0)))


def solution_from_lp(inst: Instance, cols, x, eps=1e-12) -> DistributionSolution:
    support = {cols[k]: float(x[k]) for k in range(len(cols)) if x[k] > eps}
    obj = float(sum(p * rev(inst, s) for s, p in support.items()))
    return DistributionSolution(support, obj)


def brute_force_fair(inst: Instance, cap=ENUMERATION_CAP) -> DistributionSolution:
    """Solve FAIR over every nonempty assortment of size <= K."""
    rows, _ = enumerate_assortments(inst.n, inst.K, cap, include_empty=False)
    prob = fair_lp(inst, rows)
    sol = lp_solve(prob)
    if not sol.optimal:
        raise NumericalError(f"full fair LP reported {sol.status}; a feasible point always exists")
    return solution_from_lp(inst, rows, sol.x)
