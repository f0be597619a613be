import itertools

import numpy as np
import pytest

from conftest import random_instance, random_z, ref_kp, ref_rev_cost, ref_subdual
from fairassort.errors import InputError
from fairassort.instance import Instance, brute_force_subdual, visibility_instance
from fairassort.oracles import (
    capacitated_mnl,
    exact_oracle,
    fptas,
    half_approx,
    oracle_dispatch,
    parse_method,
    ptas,
    resolve,
    uniform_half_approx,
)
from fairassort.oracles.half import SwapStats, half_approx_interval, modified_half_approx, small_items
from fairassort.oracles.schemes import chi_max, ptas_size
from fairassort.oracles.view import KnapsackView, breakpoints, evaluate_masks, make_view, mask_items


def draws(rng, count, kind="general", **kw):
    for _ in range(count):
        inst = random_instance(rng, kind=kind, **kw)
        yield inst, random_z(rng, inst.n)


# -- exact -----------------------------------------------------------------------

def test_exact_matches_enumeration(rng):
    for inst, z in draws(rng, 100, kind="revenue"):
        res = exact_oracle(inst, z)
        _, best = ref_subdual(inst, z)
        assert abs(res.value - best) <= 1e-9


def test_capacitated_mnl_single_item():
    S, lam = capacitated_mnl([2.0], [1.0], 1)
    assert S == (0,)
    assert lam == pytest.approx(2.0 * 1.0 / 2.0, abs=1e-10)


def test_capacitated_mnl_all_nonpositive():
    assert capacitated_mnl([-1.0, 0.0], [1.0, 2.0], 2) == ((), 0.0)


def test_exact_rejects_fixed_costs(rng):
    inst = random_instance(rng, n_range=(3, 3), kind="general")
    with pytest.raises(InputError):
        exact_oracle(inst, random_z(rng, 3))


def test_exact_accepts_zero_dual_on_visibility(rng):
    inst = random_instance(rng, kind="visibility")
    res = exact_oracle(inst, np.zeros((inst.n, inst.n)))
    assert res.value == pytest.approx(brute_force_subdual(inst, np.zeros((inst.n, inst.n))).value, abs=1e-9)


# -- half ------------------------------------------------------------------------

def test_half_ratio(rng):
    for inst, z in draws(rng, 200):
        res = half_approx(inst, z)
        _, best = ref_subdual(inst, z)
        assert res.value >= 0.5 * best - 1e-12
        assert res.value == pytest.approx(ref_rev_cost(inst, res.items, z), abs=1e-9)
        assert len(res.items) <= inst.K


def test_half_against_exact_at_zero_dual(rng):
    for inst, _ in draws(rng, 50, kind="revenue"):
        z = np.zeros((inst.n, inst.n))
        assert half_approx(inst, z).value >= 0.5 * exact_oracle(inst, z).value - 1e-12


def test_half_interval_two_items():
    inst = visibility_instance([1.0, 1.0], [1.0, 2.0], [1.0, 1.0], 2)
    view = make_view(inst, np.zeros((2, 2)))
    coll = half_approx_interval(view, 0.0, 3.0, closed=True)
    assert 0b01 in coll and 0b11 in coll
    vals = evaluate_masks(view, coll)
    assert vals.max() == pytest.approx(0.75)


def test_half_empty_when_every_item_loses():
    # r~ <= 0 and c~ >= 0 everywhere: every candidate set is worth at most 0
    view = KnapsackView(np.array([-0.5, 0.0, -1.0]), np.array([0.1, 0.2, 0.0]),
                        np.array([1.0, 2.0, 0.5]), 2, np.arange(3))
    for lo, hi, closed in breakpoints(view).intervals:
        coll = half_approx_interval(view, lo, hi, closed)
        assert evaluate_masks(view, coll).max() <= 0.0


def test_half_collection_covers_grid(rng):
    """Every W on an interval grid has a collection set with at least half the knapsack optimum."""
    worst = np.inf
    for inst, z in draws(rng, 80):
        view = make_view(inst, z)
        if view.n == 0:
            continue
        for lo, hi, closed in breakpoints(view).intervals:
            coll = [mask_items(m) for m in half_approx_interval(view, lo, hi, closed)]
            grid = np.linspace(lo, hi, 6 if closed else 7)[: 6]
            for W in grid:
                u = view.u(W)
                opt = ref_kp(u, view.w, W, view.K)
                if opt <= 1e-12:
                    continue
                got = max(u[S].sum() for S in coll if S)
                worst = min(worst, got / opt)
    assert worst >= 0.5


def test_swaps_per_interval_bounded(rng):
    for inst, z in draws(rng, 100):
        view = make_view(inst, z)
        if view.n == 0:
            continue
        for lo, hi, closed in breakpoints(view).intervals:
            st = SwapStats()
            half_approx_interval(view, lo, hi, closed, st)
            assert st.max_swaps <= view.n * view.K


def test_half_deterministic(rng):
    inst = random_instance(rng, n_range=(7, 7))
    z = random_z(rng, 7)
    a, b = half_approx(inst, z, keep_collection=True), half_approx(inst, z, keep_collection=True)
    assert a.items == b.items and a.collection == b.collection


# -- uniform half ------------------------------------------------------------------

def test_uniform_half_ratio(rng):
    for inst, z in draws(rng, 100, kind="uniform"):
        _, best = ref_subdual(inst, z)
        uh = uniform_half_approx(inst, z)
        assert uh.value >= 0.5 * best - 1e-12
        assert half_approx(inst, z).value >= 0.5 * best - 1e-12


def test_uniform_half_single_item():
    inst = visibility_instance([0.7], [1.5], [1.0], 1)
    res = uniform_half_approx(inst, np.zeros((1, 1)))
    assert res.items == (0,)
    assert res.value == pytest.approx(0.7 * 1.5 / 2.5)


def test_uniform_half_precondition(rng):
    with pytest.raises(InputError):
        uniform_half_approx(random_instance(rng, kind="general"), np.zeros((8, 8)))


# -- modified half and PTAS ------------------------------------------------------

def test_modified_half_trivial_cases():
    view = KnapsackView(np.ones(3), np.zeros(3), np.ones(3), 2, np.arange(3))
    assert modified_half_approx(view, [0], [], 0.0, 3.0, True) == [0]
    assert modified_half_approx(view, [0, 1], [2], 0.0, 3.0, True) == [0]


def test_modified_half_ratio(rng):
    checked = 0
    while checked < 20:
        inst = random_instance(rng, n_range=(7, 7), k_max=4)
        if inst.K < 3:
            continue
        z = random_z(rng, 7)
        view = make_view(inst, z)
        if view.n < 4:
            continue
        intervals = breakpoints(view).intervals
        lo, hi, closed = intervals[int(rng.integers(len(intervals)))]
        W = lo + (hi - lo) * float(rng.uniform(0, 1 if closed else 0.999))
        mid = 0.5 * (lo + hi)
        L = sorted(rng.choice(view.n, 2, replace=False).tolist())
        if view.w[L].sum() > W:
            continue
        pool = small_items(view, L, mid)
        coll = modified_half_approx(view, L, pool, lo, hi, closed)
        u = view.u(W)
        opt = ref_kp(u, view.w, W - view.w[L].sum(), view.K - 2, items=pool)
        got = max(u[mask_items(m)].sum() if m else 0.0 for m in coll)
        assert got >= 0.5 * opt - 1e-12
        checked += 1


@pytest.mark.parametrize("eps,K,ell", [(0.5, 3, 1), (0.3, 4, 2), (0.3, 1, 1), (0.25, 5, 2), (0.1, 4, 4)])
def test_ptas_size(eps, K, ell):
    assert ptas_size(eps, K) == ell


def test_ptas_ratio_and_dominates_half(rng):
    for inst, z in draws(rng, 200):
        _, best = ref_subdual(inst, z)
        p = ptas(inst, z, 0.25)
        assert p.value >= 0.75 * best - 1e-12
        assert p.value >= half_approx(inst, z).value - 1e-12
        assert p.value == pytest.approx(ref_rev_cost(inst, p.items, z), abs=1e-9)


def test_ptas_epsilon_range(rng):
    inst = random_instance(rng)
    for eps in (0.0, 1.0, -0.1):
        with pytest.raises(InputError):
            ptas(inst, np.zeros((inst.n, inst.n)), eps)


# -- FPTAS ---------------------------------------------------------------------------

def test_chi_max():
    assert chi_max(2, 0.5) == 10


def test_fptas_ratio(rng):
    for inst, z in draws(rng, 200, kind="uniform"):
        _, best = ref_subdual(inst, z)
        assert fptas(inst, z, 0.2).value >= 0.8 * best - 1e-12


def test_fptas_precondition(rng):
    with pytest.raises(InputError):
        fptas(random_instance(rng, kind="visibility"), np.zeros((8, 8)))


# -- dispatch ------------------------------------------------------------------------

def test_auto_paths(rng):
    assert resolve(random_instance(rng, kind="revenue"), "auto") == ("exact", None)
    assert resolve(random_instance(rng, kind="uniform"), "auto") == ("fptas", 0.2)
    assert resolve(random_instance(rng, kind="general"), "auto") == ("half", None)


@pytest.mark.parametrize("spec,out", [("half", ("half", None)), ("PTAS:0.3", ("ptas", 0.3)),
                                      ("ptas", ("ptas", 0.25)), ("uniform_half", ("uniform-half", None))])
def test_parse_method(spec, out):
    assert parse_method(spec) == out


@pytest.mark.parametrize("spec", ["simplex", "ptas:2", "ptas:x", "half:0.1"])
def test_parse_method_rejects(spec):
    with pytest.raises(InputError):
        parse_method(spec)


def test_dispatch_incompatible(rng):
    inst = random_instance(rng, kind="general")
    with pytest.raises(InputError):
        oracle_dispatch(inst, np.zeros((inst.n, inst.n)), "fptas")


@pytest.mark.parametrize("method", ["half", "ptas", "brute", "auto"])
def test_dispatch_values_recompute(rng, method):
    for inst, z in draws(rng, 20):
        res = oracle_dispatch(inst, z, method)
        assert res.value == pytest.approx(ref_rev_cost(inst, res.items, z) if res.items else 0.0, abs=1e-9)
        assert list(res.items) == sorted(set(res.items))
