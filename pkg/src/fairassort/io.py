"""JSON documents for instances, solutions, reports and dual points.

Instance document::

    {"n": 3, "K": 2, "delta": 0.1,
     "items": [{"id": "1", "w": 1.0, "r": 0.5, "q": 1.0, "a": 0.0, "b": 1.0}, ...]}

Assortments in documents list item ids, not positions.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .errors import InputError, ParseError
from .instance import DistributionSolution, Instance

ITEM_FIELDS = ("id", "w", "r", "q", "a", "b")


def _num(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"{what} must be a number, got {x!r}")
    return float(x)


def instance_to_dict(inst: Instance):
    items = []
    for k in range(inst.n):
        items.append({
            "id": inst.ids[k],
            "w": float(inst.w[k]),
            "r": float(inst.r[k]),
            "q": float(inst.q[k]),
            "a": float(inst.a[k]),
            "b": float(inst.b[k]),
        })
    return {"n": inst.n, "K": inst.K, "delta": inst.delta, "items": items}


def instance_from_dict(doc) -> Instance:
    if not isinstance(doc, dict):
        raise InputError("instance document must be an object")
    missing = [k for k in ("K", "delta", "items") if k not in doc]
    if missing:
        raise InputError(f"instance document lacks {', '.join(missing)}")
    items = doc["items"]
    if not isinstance(items, list) or not items:
        raise InputError("items must be a nonempty list")
    if "n" in doc and doc["n"] != len(items):
        raise InputError(f"n = {doc['n']} but {len(items)} items are listed")
    cols = {f: [] for f in ITEM_FIELDS}
    for k, it in enumerate(items):
        if not isinstance(it, dict):
            raise InputError(f"item {k} must be an object")
        lack = [f for f in ITEM_FIELDS if f not in it]
        if lack:
            raise InputError(f"item {k} lacks {', '.join(lack)}")
        cols["id"].append(str(it["id"]))
        for f in ITEM_FIELDS[1:]:
            cols[f].append(_num(it[f], f"item {k} field {f}"))
    K = doc["K"]
    if isinstance(K, bool) or not isinstance(K, int):
        raise InputError("K must be an integer")
    return Instance(K, _num(doc["delta"], "delta"), cols["a"], cols["b"], cols["r"],
                    cols["w"], cols["q"], tuple(cols["id"]))


def _dump(doc, path):
    text = json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"
    if path is None:
        return text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def save_instance(inst: Instance, path=None):
    return _dump(instance_to_dict(inst), path)


def load_instance(path) -> Instance:
    return instance_from_dict(_load(path))


def save_instances(insts, path=None):
    """Several instances in one document: {"instances": [...]}."""
    return _dump({"instances": [instance_to_dict(i) for i in insts]}, path)


def load_instances(path):
    """Accepts a single instance document or an {"instances": [...]} bundle."""
    doc = _load(path)
    if isinstance(doc, dict) and "instances" in doc:
        if not isinstance(doc["instances"], list) or not doc["instances"]:
            raise InputError("instances must be a nonempty list")
        return [instance_from_dict(d) for d in doc["instances"]]
    return [instance_from_dict(doc)]


def solution_to_dict(inst: Instance, sol: DistributionSolution):
    support = [{"items": [inst.ids[i] for i in S], "p": float(p)} for S, p in sol.items()]
    return {"objective": float(sol.objective), "support": support}


def solution_from_dict(inst: Instance, doc) -> DistributionSolution:
    pos = {name: k for k, name in enumerate(inst.ids)}
    try:
        support = {}
        for rec in doc["support"]:
            S = tuple(sorted(pos[str(i)] for i in rec["items"]))
            support[S] = support.get(S, 0.0) + _num(rec["p"], "p")
        return DistributionSolution(support, _num(doc["objective"], "objective"))
    except KeyError as exc:
        raise InputError(f"solution document refers to unknown key or item {exc}") from None


def dual_to_dict(z, rho=None):
    doc = {"z": np.asarray(z, float).tolist()}
    if rho is not None:
        doc["rho"] = float(rho)
    return doc


def load_dual(path, n):
    """z matrix from a document {"z": [[...]]} or a bare nested list."""
    doc = _load(path)
    z = doc.get("z") if isinstance(doc, dict) else doc
    try:
        z = np.array(z, dtype=float)
    except (TypeError, ValueError):
        raise InputError("z must be an n x n numeric matrix") from None
    if z.shape != (n, n):
        raise InputError(f"z must have shape ({n}, {n}), got {z.shape}")
    if not np.all(np.isfinite(z)) or np.any(z < 0):
        raise InputError("z entries must be finite and nonnegative")
    return z


def report_to_dict(inst: Instance, rep, timing=False):
    """Stable report document. Wall time is included only on request so
    that repeated runs write identical bytes."""
    doc = {
        "method": rep.method,
        "oracle": rep.oracle,
        "objective": float(rep.objective),
        "iterations": int(rep.iterations),
        "oracle_calls": int(rep.oracle_calls),
        "support_size": len(rep.solution.support),
        "support_size_pruned": rep.solution.pruned_size(),
        "solution": solution_to_dict(inst, rep.solution),
        "dual": dual_to_dict(rep.dual.z, rep.dual.rho),
        "generated_columns": [[inst.ids[i] for i in S] for S in rep.generated_columns],
        "checks": {k: _plain(v) for k, v in sorted(rep.checks.items())},
    }
    if timing:
        doc["wall_time"] = float(rep.wall_time)
    return doc


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def dump_json(doc, path=None):
    return _dump(doc, path)


def load_json(path):
    return _load(path)
