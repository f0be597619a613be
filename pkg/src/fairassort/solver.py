"""Solving the fair assortment LP with column generation or the ellipsoid method.

Both solvers talk to the pricing problem only through a separation oracle
(see :mod:`fairassort.oracles`). With a beta-approximate oracle both return
a feasible randomized plan whose revenue is at least beta times optimal.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from .errors import ConvergenceError, InputError, NumericalError
from .instance import (
    FEAS_TOL,
    DistributionSolution,
    DualPoint,
    Instance,
    assortment,
    brute_force_fair,
    count_assortments,
    dual_from_rows,
    fair_lp,
    fairness_check,
    outcome_vector,
    solution_from_lp,
)
from .lp import lp_solve

DEFINITE_TOL = 1e-9
WIDTH_TOL = 1e-12


@dataclass
class EllipsoidConfig:
    t_max: int = 10_000
    initial_radius: float | None = None
    q_max: int | None = None  # reporting only; enters the theoretical iteration bound
    trace: bool = False  # record log det(D) after every cut (for diagnostics and tests)


@dataclass
class SolverConfig:
    method: str = "colgen"
    oracle: str = "auto"
    feas_tol: float = FEAS_TOL
    red_cost_tol: float = 1e-7
    max_iter: int | None = None  # colgen cap, default 10 n^2
    stall_window: int = 50
    stall_tol: float = 1e-9
    ellipsoid: EllipsoidConfig = field(default_factory=EllipsoidConfig)
    verify: bool = False  # compare against enumeration when affordable
    verify_cap: int = 10**4

    def __post_init__(self):
        if self.method not in ("colgen", "ellipsoid"):
            raise InputError(f"unknown solver method {self.method!r}")
        if self.feas_tol <= 0 or self.red_cost_tol <= 0:
            raise InputError("tolerances must be positive")
        if self.ellipsoid.t_max < 1:
            raise InputError("t_max must be at least 1")
        oracles.parse_method(self.oracle)


@dataclass
class SolveReport:
    solution: DistributionSolution
    dual: DualPoint
    objective: float
    iterations: int
    generated_columns: list
    oracle_calls: int
    wall_time: float
    method: str = ""
    oracle: str = ""
    history: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    trace: dict = field(default_factory=dict)


# -- master problem ----------------------------------------------------------

def restricted_master(inst: Instance, columns, basis=None):
    """Fair LP over ``columns`` only. Returns (solution, dual, lp_solution)."""
    cols = [assortment(s, inst.n) for s in columns]
    if not cols:
        raise InputError("the restricted master needs at least one column")
    if any(len(s) > inst.K or not s for s in cols):
        raise InputError("columns must be nonempty and of size at most K")
    lp = lp_solve(fair_lp(inst, cols), basis=basis)
    if not lp.optimal:
        raise NumericalError(f"restricted master reported {lp.status}")
    return solution_from_lp(inst, cols, lp.x), dual_from_rows(inst, lp.duals), lp


def _shift_basis(basis, n_old):
    """Keep a basis valid after appending one structural column."""
    return [j if j < n_old else j + 1 for j in basis]


def _oracle_fn(inst, spec):
    name, eps = oracles.resolve(inst, spec)
    label = name if eps is None else f"{name}:{eps:g}"
    return (lambda z: oracles.oracle_dispatch(inst, z, label)), name, eps, label


def column_generation(inst: Instance, config: SolverConfig | None = None) -> SolveReport:
    config = config or SolverConfig()
    start = time.perf_counter()
    oracle, name, eps, label = _oracle_fn(inst, config.oracle)
    n = inst.n
    columns = [(i,) for i in range(n)]
    seen = set(columns)
    generated = []
    cap = config.max_iter or 10 * n * n
    history = []
    basis = None
    calls = 0
    it = 0
    while True:
        it += 1
        sol, dual, lp = restricted_master(inst, columns, basis)
        history.append(sol.objective)
        res = oracle(dual.z)
        calls += 1
        improving = res.value > dual.rho + config.red_cost_tol and res.items and res.items not in seen
        if not improving:
            break
        if len(history) > config.stall_window and history[-1] - history[-1 - config.stall_window] < config.stall_tol:
            break
        if it >= cap:
            raise ConvergenceError(f"column generation did not converge within {cap} iterations")
        basis = _shift_basis(lp.basis, len(columns))
        columns.append(res.items)
        seen.add(res.items)
        generated.append(res.items)
    return SolveReport(sol, dual, sol.objective, it, generated, calls, time.perf_counter() - start,
                       "colgen", label, history)


# -- ellipsoid ---------------------------------------------------------------

def _dual_objective_vector(inst: Instance):
    n = inst.n
    d = np.zeros(n * n + 1)
    Q = inst.delta * np.outer(inst.q, inst.q)
    np.fill_diagonal(Q, 0.0)
    d[: n * n] = Q.reshape(-1)
    d[-1] = 1.0
    return d


def _cut_for_set(inst: Instance, s):
    """a_S with a_S . (z, rho) = sum_{i in S} O_i(S) c_i(z) + rho."""
    n = inst.n
    o = outcome_vector(inst, s)
    G = np.outer(o, inst.q) - np.outer(inst.q, o)
    np.fill_diagonal(G, 0.0)
    return np.concatenate([G.reshape(-1), [1.0]])


def ellipsoid_solve(inst: Instance, config: SolverConfig | None = None) -> SolveReport:
    config = config or SolverConfig(method="ellipsoid")
    start = time.perf_counter()
    oracle, name, eps, label = _oracle_fn(inst, config.oracle)
    n = inst.n
    N = n * n + 1
    rbar = inst.rbar
    R = config.ellipsoid.initial_radius
    if R is None:
        R = n * max(rbar, inst.delta * float(inst.q.max()) ** 2, 1.0)
    s = np.zeros(N)
    s[-1] = rbar
    D = (R * R) * np.eye(N)
    d = _dual_objective_vector(inst)
    best = s.copy()
    best_obj = float(d @ best)  # (0, rbar) is dual feasible: rev(S) < rbar
    found = []
    seen = set()
    calls = 0
    history = [best_obj]
    scale = N * N / (N * N - 1.0)
    stopped = None
    logdet = []
    for t in range(config.ellipsoid.t_max):
        a = None
        if d @ s >= best_obj:
            a = -d
        elif s[-1] < 0:
            a = np.zeros(N)
            a[-1] = 1.0
        elif np.any(s[:-1] < 0):
            k = int(np.flatnonzero(s[:-1] < 0)[0])
            a = np.zeros(N)
            a[k] = 1.0
        else:
            z = s[:-1].reshape(n, n)
            res = oracle(z)
            calls += 1
            if res.items and res.value > s[-1]:
                a = _cut_for_set(inst, res.items)
                if res.items not in seen:
                    seen.add(res.items)
                    found.append(res.items)
            else:
                best = s.copy()
                best_obj = float(d @ s)
                history.append(best_obj)
                continue
        Da = D @ a
        aDa = float(a @ Da)
        aa = float(a @ a)
        if aDa < -DEFINITE_TOL * aa * float(np.abs(np.diag(D)).max()):
            raise NumericalError(f"ellipsoid shape lost definiteness at iteration {t} (a'Da = {aDa:g})")
        if aDa <= (WIDTH_TOL**2) * aa:
            # width along a is below resolution: the ellipsoid has collapsed
            stopped = t
            break
        s = s + Da / ((N + 1) * np.sqrt(aDa))
        D = scale * (D - (2.0 / (N + 1)) * np.outer(Da, Da) / aDa)
        D = 0.5 * (D + D.T)
        if config.ellipsoid.trace:
            logdet.append(float(np.linalg.slogdet(D)[1]))
    columns = [(i,) for i in range(n)] + [S for S in found if len(S) > 1]
    sol, _, _ = restricted_master(inst, columns)
    z = best[:-1].reshape(n, n).copy()
    iters = config.ellipsoid.t_max if stopped is None else stopped
    rep = SolveReport(sol, DualPoint(z, float(best[-1])), sol.objective, iters,
                      found, calls, time.perf_counter() - start, "ellipsoid", label, history)
    rep.checks["dual_objective"] = best_obj
    rep.checks["collapsed"] = stopped is not None
    if config.ellipsoid.trace:
        rep.trace["logdet"] = logdet
        rep.trace["initial_logdet"] = float(N * np.log(R * R))
    if config.ellipsoid.q_max:
        rep.checks["iteration_bound"] = float(n**12 * np.log(n * config.ellipsoid.q_max))
    return rep


# -- entry point -------------------------------------------------------------

def solve(inst: Instance, config: SolverConfig | None = None) -> SolveReport:
    config = config or SolverConfig()
    if config.method == "colgen":
        rep = column_generation(inst, config)
    else:
        rep = ellipsoid_solve(inst, config)
    verdict = fairness_check(inst, rep.solution, config.feas_tol)
    rep.checks["fair"] = verdict.passed
    rep.checks["worst_gap"] = verdict.slack
    if not verdict.passed:
        raise NumericalError(f"solution violates fairness for pair {verdict.pair} by {verdict.slack:g}")
    if config.verify and count_assortments(inst.n, inst.K) <= config.verify_cap:
        name, eps = oracles.resolve(inst, config.oracle)
        beta = oracles.ratio(name, eps)
        opt = brute_force_fair(inst).objective
        rep.checks["optimum"] = opt
        rep.checks["beta"] = beta
        rep.checks["contract"] = rep.objective >= beta * opt - 1e-6
    return rep
