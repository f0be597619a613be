"""Separation oracles for the cost-adjusted revenue subproblem."""
from __future__ import annotations

from ..errors import InputError
from ..instance import Instance, brute_force_subdual
from .exact import capacitated_mnl, exact_oracle
from .half import half_approx, uniform_half_approx
from .schemes import fptas, ptas

DEFAULT_EPS = {"ptas": 0.25, "fptas": 0.2}

__all__ = [
    "capacitated_mnl", "exact_oracle", "half_approx", "uniform_half_approx",
    "ptas", "fptas", "parse_method", "resolve", "oracle_dispatch", "ratio",
]


def parse_method(spec):
    """'half', 'ptas', 'ptas:0.3', 'fptas:0.1', 'exact', 'brute', 'auto' ..."""
    name, _, arg = str(spec).strip().lower().partition(":")
    name = name.replace("_", "-")
    known = {"auto", "exact", "half", "uniform-half", "ptas", "fptas", "brute"}
    if name not in known:
        raise InputError(f"unknown oracle method {spec!r}")
    eps = None
    if name in DEFAULT_EPS:
        try:
            eps = float(arg) if arg else DEFAULT_EPS[name]
        except ValueError:
            raise InputError(f"bad epsilon in {spec!r}") from None
        if not 0 < eps < 1:
            raise InputError("epsilon must lie in (0, 1)")
    elif arg:
        raise InputError(f"method {name!r} takes no parameter")
    return name, eps


def resolve(inst: Instance, spec):
    """Concrete (name, eps) for an instance, expanding 'auto' and checking compatibility."""
    name, eps = parse_method(spec)
    if name == "auto":
        if inst.is_revenue_fair:
            return "exact", None
        if inst.is_visibility_fair and inst.uniform_revenue:
            return "fptas", DEFAULT_EPS["fptas"]
        return "half", None
    if name in ("fptas", "uniform-half") and not (inst.is_visibility_fair and inst.uniform_revenue):
        raise InputError(f"{name} needs a visibility instance with equal revenues")
    return name, eps


def ratio(name, eps=None):
    """Worst-case approximation ratio of a method."""
    if name in ("exact", "brute"):
        return 1.0
    if name in ("half", "uniform-half"):
        return 0.5
    return 1.0 - eps


def oracle_dispatch(inst: Instance, z, method="auto", keep_collection=False):
    name, eps = resolve(inst, method)
    if name == "exact":
        return exact_oracle(inst, z)
    if name == "brute":
        return brute_force_subdual(inst, z)
    if name == "half":
        return half_approx(inst, z, keep_collection)
    if name == "uniform-half":
        return uniform_half_approx(inst, z, keep_collection)
    if name == "ptas":
        return ptas(inst, z, eps, keep_collection)
    return fptas(inst, z, eps, keep_collection)
