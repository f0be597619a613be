"""Dense bounded-variable primal simplex.

Small and deliberately plain: every row gets a slack column so that all
rows become equalities, variables keep their own bounds (nonbasic columns
sit at a bound), and the basis inverse is updated in product form with a
periodic refactorization. Pricing uses the largest reduced cost until a
degenerate pivot is seen, then switches to Bland's rule until the
objective moves again. That keeps the fast path fast and still rules out
cycling.

Problems are stated as maximization by default; pass ``maximize=False``
for minimization. Duals are reported for the problem as stated, so for a
maximization problem a binding ``<=`` row has a nonnegative dual.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_SENSES = ("<=", ">=", "=")

# nonbasic position codes
_AT_LB, _AT_UB, _FREE, _BASIC = 0, 1, 2, 3


@dataclass(frozen=True)
class LpProblem:
    """``max (or min) c.x  s.t.  A x (senses) b,  lb <= x <= ub``."""

    c: np.ndarray
    A: np.ndarray
    senses: tuple
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    maximize: bool = True

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float)
        if A.ndim == 1 and A.size == 0:
            A = A.reshape(0, c.size)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        lb = np.asarray(self.lb, dtype=float).reshape(-1)
        ub = np.asarray(self.ub, dtype=float).reshape(-1)
        senses = tuple(self.senses)
        m, d = A.shape
        if c.size != d or b.size != m or len(senses) != m:
            raise InputError("inconsistent LP dimensions")
        if lb.size != d or ub.size != d:
            raise InputError("bounds must have one entry per variable")
        if any(s not in _SENSES for s in senses):
            raise InputError(f"row senses must be among {_SENSES}")
        if np.any(lb > ub):
            raise InputError("lower bound exceeds upper bound")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise InputError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        object.__setattr__(self, "senses", senses)

    @property
    def shape(self):
        return self.A.shape


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None = None
    objective: float = float("nan")
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    basis: list = field(default_factory=list)
    iterations: int = 0

    @property
    def optimal(self):
        return self.status == OPTIMAL


class _Tableau:
    """Working state of one solve. Columns: structural, slack, artificial."""

    def __init__(self, prob: LpProblem, tol: float):
        m, d = prob.shape
        self.m, self.d = m, d
        self.tol = tol
        slack_lb = np.array([0.0 if s == "<=" else (-np.inf if s == ">=" else 0.0) for s in prob.senses])
        slack_ub = np.array([np.inf if s == "<=" else 0.0 for s in prob.senses])
        self.M = np.hstack([prob.A, np.eye(m)])
        self.lb = np.concatenate([prob.lb, slack_lb])
        self.ub = np.concatenate([prob.ub, slack_ub])
        self.b = prob.b
        sign = 1.0 if prob.maximize else -1.0
        self.cost = np.concatenate([sign * prob.c, np.zeros(m)])
        self.sign = sign
        self.iterations = 0

    # -- setup ---------------------------------------------------------
    def _nonbasic_value(self, j):
        if np.isfinite(self.lb[j]):
            return self.lb[j], _AT_LB
        if np.isfinite(self.ub[j]):
            return self.ub[j], _AT_UB
        return 0.0, _FREE

    def cold_start(self):
        """Slack basis where it is feasible, artificial columns elsewhere."""
        m, d = self.m, self.d
        ncol = self.M.shape[1]
        self.x = np.zeros(ncol)
        self.state = np.zeros(ncol, dtype=np.int8)
        for j in range(d):
            self.x[j], self.state[j] = self._nonbasic_value(j)
        resid = self.b - self.M[:, :d] @ self.x[:d]
        basis = []
        art_cols = []
        art_rows = []
        for i in range(m):
            s = d + i
            if self.lb[s] - self.tol <= resid[i] <= self.ub[s] + self.tol:
                self.x[s] = resid[i]
                self.state[s] = _BASIC
                basis.append(s)
            else:
                # slack parks at the bound it violates; an artificial takes the rest
                self.x[s] = self.lb[s] if resid[i] < self.lb[s] else self.ub[s]
                self.state[s] = _AT_LB if resid[i] < self.lb[s] else _AT_UB
                if self.lb[s] == self.ub[s]:
                    self.state[s] = _AT_LB
                gap = resid[i] - self.x[s]
                art_rows.append((i, 1.0 if gap >= 0 else -1.0, abs(gap)))
                basis.append(None)
        if art_rows:
            extra = np.zeros((m, len(art_rows)))
            for k, (i, sgn, val) in enumerate(art_rows):
                extra[i, k] = sgn
                col = ncol + k
                art_cols.append(col)
                basis[i] = col
            self.M = np.hstack([self.M, extra])
            self.lb = np.concatenate([self.lb, np.zeros(len(art_rows))])
            self.ub = np.concatenate([self.ub, np.full(len(art_rows), np.inf)])
            self.cost = np.concatenate([self.cost, np.zeros(len(art_rows))])
            self.x = np.concatenate([self.x, [v for _, _, v in art_rows]])
            self.state = np.concatenate([self.state, np.full(len(art_rows), _BASIC, dtype=np.int8)])
        self.art_cols = art_cols
        self.basis = basis
        self.refactor()

    def warm_start(self, basis, at_upper=()):
        """Start from a caller-supplied basis; returns False if unusable."""
        m, d = self.m, self.d
        ncol = self.M.shape[1]
        if len(basis) != m or len(set(basis)) != m or any(not 0 <= j < ncol for j in basis):
            return False
        lb_fin, ub_fin = np.isfinite(self.lb), np.isfinite(self.ub)
        self.x = np.where(lb_fin, self.lb, np.where(ub_fin, self.ub, 0.0))
        self.state = np.where(lb_fin, _AT_LB, np.where(ub_fin, _AT_UB, _FREE)).astype(np.int8)
        up = np.zeros(ncol, bool)
        up[list(at_upper)] = True
        up &= ub_fin
        self.x[up] = self.ub[up]
        self.state[up] = _AT_UB
        for j in basis:
            self.state[j] = _BASIC
        self.art_cols = []
        self.basis = list(basis)
        try:
            self.refactor()
        except np.linalg.LinAlgError:
            return False
        xb = self.x[self.basis]
        lo, hi = self.lb[self.basis], self.ub[self.basis]
        return bool(np.all(xb >= lo - 1e-9) and np.all(xb <= hi + 1e-9))

    def refactor(self):
        B = self.M[:, self.basis]
        self.Binv = np.linalg.inv(B)
        nb = self.state != _BASIC
        rhs = self.b - self.M[:, nb] @ self.x[nb]
        self.x[self.basis] = self.Binv @ rhs
        self.since_refactor = 0

    # -- main loop -----------------------------------------------------
    def run(self, cost, max_iter):
        tol = self.tol
        bland = False
        M = self.M
        while True:
            if self.iterations >= max_iter:
                raise NumericalError("simplex iteration cap reached (cycling guard)")
            basis = self.basis
            y = cost[basis] @ self.Binv
            dj = cost - y @ M
            st = self.state
            up = (st == _AT_LB) & (dj > tol) & (self.ub > self.lb)
            down = (st == _AT_UB) & (dj < -tol) & (self.ub > self.lb)
            free = (st == _FREE) & (np.abs(dj) > tol)
            cand = np.flatnonzero(up | down | free)
            if cand.size == 0:
                return OPTIMAL
            if bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(dj[cand]))])
            direction = 1.0 if dj[j] > 0 else -1.0
            alpha = self.Binv @ M[:, j]
            # basic variables move by -direction * t * alpha
            move = direction * alpha
            xb = self.x[basis]
            lbb, ubb = self.lb[basis], self.ub[basis]
            t_best = np.inf
            with np.errstate(divide="ignore", invalid="ignore"):
                dec = move > 1e-11
                inc = move < -1e-11
                ratios = np.full(len(basis), np.inf)
                ratios[dec] = (xb[dec] - lbb[dec]) / move[dec]
                ratios[inc] = (ubb[inc] - xb[inc]) / (-move[inc])
            ratios = np.maximum(ratios, 0.0)
            if ratios.size:
                t_best = float(ratios.min())
            t_flip = self.ub[j] - self.lb[j] if st[j] != _FREE else np.inf
            if not np.isfinite(t_best) and not np.isfinite(t_flip):
                return UNBOUNDED
            self.iterations += 1
            if t_flip <= t_best:
                # bound flip, no basis change
                self.x[basis] = xb - t_flip * move
                self.x[j] = self.ub[j] if st[j] == _AT_LB else self.lb[j]
                st[j] = _AT_UB if st[j] == _AT_LB else _AT_LB
                bland = False
                continue
            ties = np.flatnonzero(ratios <= t_best + 1e-12)
            if bland:
                r = int(ties[np.argmin(np.asarray(basis)[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            leaving = basis[r]
            self.x[basis] = xb - t_best * move
            self.x[j] = self.x[j] + direction * t_best
            # leaving variable snaps to the bound it reached
            if move[r] > 0:
                self.x[leaving], st[leaving] = self.lb[leaving], _AT_LB
            else:
                self.x[leaving], st[leaving] = self.ub[leaving], _AT_UB
            if self.lb[leaving] == self.ub[leaving]:
                st[leaving] = _AT_LB
            st[j] = _BASIC
            basis[r] = j
            piv = self.Binv[r] / alpha[r]
            self.Binv -= np.outer(alpha, piv)
            self.Binv[r] = piv
            self.since_refactor += 1
            if self.since_refactor >= 64:
                self.refactor()
            bland = t_best <= 1e-12


def lp_solve(problem: LpProblem, tol: float = 1e-9, basis=None, at_upper=(), max_iter=None) -> LpSolution:
    """Solve ``problem`` and return an optimal basic solution with duals.

    ``basis`` (indices into structural columns followed by one slack per
    row) warm-starts phase two when it is primal feasible; otherwise the
    solver falls back to a cold start.
    """
    m, d = problem.shape
    tab = _Tableau(problem, tol)
    if max_iter is None:
        max_iter = 50 * (m + d) + 1000
    warm = basis is not None and tab.warm_start(list(basis), at_upper)
    if not warm:
        tab = _Tableau(problem, tol)
        tab.cold_start()
        if tab.art_cols:
            phase1 = np.zeros(tab.M.shape[1])
            phase1[tab.art_cols] = -1.0
            status = tab.run(phase1, max_iter)
            if status != OPTIMAL:
                raise NumericalError("phase one did not terminate at an optimum")
            infeas = float(np.sum(tab.x[tab.art_cols]))
            scale = 1.0 + float(np.max(np.abs(problem.b), initial=0.0))
            if infeas > 1e-7 * scale:
                return LpSolution(INFEASIBLE, iterations=tab.iterations)
            tab.ub[tab.art_cols] = 0.0
            for k in tab.art_cols:
                if tab.state[k] != _BASIC:
                    tab.state[k] = _AT_LB
                    tab.x[k] = 0.0
    status = tab.run(tab.cost, max_iter)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=tab.iterations)
    if tab.since_refactor:
        tab.refactor()
    y = tab.cost[tab.basis] @ tab.Binv
    dj = tab.cost - y @ tab.M
    x = tab.x[:d].copy()
    # clean roundoff against the bounds
    x = np.minimum(np.maximum(x, problem.lb), problem.ub)
    return LpSolution(
        OPTIMAL,
        x=x,
        objective=float(problem.c @ x),
        duals=tab.sign * y,
        reduced_costs=tab.sign * dj[:d],
        basis=list(tab.basis),
        iterations=tab.iterations,
    )


def kp_relax_solve(utilities, weights, W, K, tol=1e-9, method="enum") -> LpSolution:
    """Two-row knapsack relaxation: max u.x, w.x <= W, sum x <= K, 0 <= x <= 1.

    ``method="enum"`` checks every candidate basis (pairs drawn from the item
    and slack columns) at once and keeps the first one that is both primal
    and dual feasible. Ties that defeat it fall through to the simplex,
    which ``method="simplex"`` selects directly.
    """
    u = np.asarray(utilities, dtype=float)
    w = np.asarray(weights, dtype=float)
    if W < 0 or K < 0:
        raise InputError("capacity and cardinality must be nonnegative")
    if method not in ("enum", "simplex"):
        raise InputError(f"unknown relaxation method {method!r}")
    if method == "enum":
        # items with u <= 0 sit at zero in some basic optimum; drop them
        keep = np.flatnonzero(u > 0)
        sol = _kp_enum(u[keep], w[keep], float(W), float(K), tol)
        if sol is not None:
            x = np.zeros_like(u)
            x[keep] = sol.x
            d, dk = u.size, keep.size
            basis = [int(keep[j]) if j < dk else d + (j - dk) for j in sol.basis]
            y = sol.duals
            return LpSolution(OPTIMAL, x=x, objective=float(u @ x), duals=y,
                              reduced_costs=u - y[0] * w - y[1], basis=basis, iterations=0)
    prob = LpProblem(
        c=u,
        A=np.vstack([w, np.ones_like(w)]),
        senses=("<=", "<="),
        b=np.array([W, K], dtype=float),
        lb=np.zeros_like(u),
        ub=np.ones_like(u),
    )
    # warm start: slack basis with a greedy ratio prefix parked at x = 1
    d = u.size
    start = []
    room, left = float(W), int(K)
    for i in np.argsort(-u / np.where(w > 0, w, 1.0), kind="stable"):
        if u[i] <= 0 or left == 0:
            break
        if w[i] <= room:
            start.append(int(i))
            room -= w[i]
            left -= 1
    return lp_solve(prob, tol=tol, basis=[d, d + 1], at_upper=start)


_PAIRS = {}


def _pairs(ncol):
    if ncol not in _PAIRS:
        p, q = np.triu_indices(ncol, 1)
        _PAIRS[ncol] = (p, q)
    return _PAIRS[ncol]


def _kp_enum(u, w, W, K, tol):
    d = u.size
    A = np.zeros((2, d + 2))
    A[0, :d], A[1, :d] = w, 1.0
    A[0, d], A[1, d + 1] = 1.0, 1.0
    c = np.concatenate([u, [0.0, 0.0]])
    ub = np.concatenate([np.ones(d), [np.inf, np.inf]])
    p, q = _pairs(d + 2)
    det = A[0, p] * A[1, q] - A[0, q] * A[1, p]
    ok = np.abs(det) > 1e-12
    p, q, det = p[ok], q[ok], det[ok]
    # y solves y B = c_B for B = [A_p A_q]
    y0 = (c[p] * A[1, q] - c[q] * A[1, p]) / det
    y1 = (c[q] * A[0, p] - c[p] * A[0, q]) / det
    dj = c[None, :] - y0[:, None] * A[0] - y1[:, None] * A[1]
    rows = np.arange(p.size)
    basic = np.zeros_like(dj, dtype=bool)
    basic[rows, p] = True
    basic[rows, q] = True
    # nonbasic slacks rest at zero, so their reduced cost must be <= 0
    dual_ok = np.all(basic[:, d:] | (dj[:, d:] <= tol), axis=1)
    xn = np.where(basic, 0.0, (dj > tol).astype(float))
    xn[:, d:] = 0.0
    rhs0 = W - xn @ A[0]
    rhs1 = K - xn @ A[1]
    xp = (rhs0 * A[1, q] - rhs1 * A[0, q]) / det
    xq = (rhs1 * A[0, p] - rhs0 * A[1, p]) / det
    feas_tol = 1e-9 * (1.0 + max(W, K))
    primal_ok = (xp >= -feas_tol) & (xp <= ub[p] + feas_tol) & (xq >= -feas_tol) & (xq <= ub[q] + feas_tol)
    hits = np.flatnonzero(dual_ok & primal_ok)
    if hits.size == 0:
        return None
    k = int(hits[0])
    x = xn[k].copy()
    x[p[k]], x[q[k]] = xp[k], xq[k]
    x = np.clip(x[:d], 0.0, 1.0)
    return LpSolution(
        OPTIMAL,
        x=x,
        objective=float(u @ x),
        duals=np.array([y0[k], y1[k]]),
        reduced_costs=dj[k, :d],
        basis=[int(p[k]), int(q[k])],
        iterations=0,
    )


def fractional_count(x, tol=1e-9):
    x = np.asarray(x)
    return int(np.sum((x > tol) & (x < 1 - tol)))
