"""Instance generators, ratings ingestion and fairness sweeps."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParseError
from .instance import Instance, expected_outcomes, rev
from .oracles import capacitated_mnl
from .solver import SolverConfig, solve

log = logging.getLogger(__name__)


def _check_range(rng, name):
    lo, hi = (float(v) for v in rng)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise InputError(f"{name} must be a finite interval with lo <= hi, got {rng}")
    return lo, hi


# -- synthetic MNL instances --------------------------------------------------

@dataclass
class SyntheticSpec:
    """w_i = exp(beta r_i + theta_i), r ~ U(revenue_range), theta ~ U(theta_range).

    ``quality_rule`` is "w" (q = w) or "custom", in which case ``quality``
    holds the q vector used for every instance.
    """

    n: int = 10
    K: int = 5
    beta: float = -1.0
    revenue_range: tuple = (0.0, 1.0)
    theta_range: tuple = (0.0, 0.5)
    quality_rule: str = "w"
    quality: tuple | None = None
    seed: int = 0
    instance_count: int = 1
    delta: float = 0.0

    def __post_init__(self):
        if self.n < 1 or not 1 <= self.K <= self.n:
            raise InputError("need n >= 1 and 1 <= K <= n")
        if not math.isfinite(self.beta) or self.beta > 0:
            raise InputError("beta is a price sensitivity and must be <= 0")
        self.revenue_range = _check_range(self.revenue_range, "revenue_range")
        self.theta_range = _check_range(self.theta_range, "theta_range")
        if self.revenue_range[0] < 0:
            raise InputError("revenues must be nonnegative")
        if self.instance_count < 1:
            raise InputError("instance_count must be at least 1")
        if self.quality_rule not in ("w", "custom"):
            raise InputError("quality_rule is 'w' or 'custom'")
        if self.quality_rule == "custom" and (self.quality is None or len(self.quality) != self.n):
            raise InputError("custom quality needs one value per item")


def gen_synthetic(spec: SyntheticSpec):
    """Visibility-outcome instances (a = 0, b = 1), deterministic in the seed."""
    rng = np.random.default_rng(spec.seed)
    out = []
    for _ in range(spec.instance_count):
        r = rng.uniform(*spec.revenue_range, size=spec.n)
        theta = rng.uniform(*spec.theta_range, size=spec.n)
        # a zero draw would be an invalid revenue; U[0, 1) hits it with probability 0
        r = np.maximum(r, np.finfo(float).tiny)
        w = np.exp(spec.beta * r + theta)
        q = w if spec.quality_rule == "w" else np.asarray(spec.quality, float)
        out.append(Instance(spec.K, spec.delta, np.zeros(spec.n), np.ones(spec.n), r, w, q))
    return out


def benchmark_spec(beta, instance_count=100, seed=0):
    return SyntheticSpec(n=10, K=5, beta=beta, revenue_range=(0.0, 1.0), theta_range=(0.0, 0.5),
                         seed=seed, instance_count=instance_count)


# -- two-group presets --------------------------------------------------------

QUADRANT_RANGES = {
    "high_q": (0.5, 1.0), "low_q": (0.0, 0.5),
    "high_r": (0.6, 1.0), "low_r": (0.2, 0.6),
    "weight": (1.0, 1.0),
}
ATTRACTIVE_RANGES = {"revenue": (0.0, 1.0), "theta_high": (0.4, 1.0), "theta_low": (0.2, 0.4)}


def gen_two_group(preset="quadrant", n=None, K=None, seed=0, delta=0.0, beta=-1.0, m=1, **ranges):
    """Two-group instances.

    ``quadrant``: items cycle through the quadrants (high q, high r),
    (high q, low r), (low q, high r), (low q, low r); revenue objective with
    visibility outcomes. Default n = 4, K = 2. Weights come from the
    ``weight`` range (a point mass at 1 by default).

    ``attractive``: the first ``m`` items are highly attractive (larger theta);
    w_i = exp(beta r_i + theta_i), q = w, visibility outcomes. Default
    n = 10, K = 5.
    """
    rng = np.random.default_rng(seed)
    if preset == "quadrant":
        cfg = {**QUADRANT_RANGES, **ranges}
        for k in cfg:
            if k not in QUADRANT_RANGES:
                raise InputError(f"unknown quadrant range {k!r}")
            cfg[k] = _check_range(cfg[k], k)
        n = 4 if n is None else int(n)
        K = 2 if K is None else int(K)
        quad = np.arange(n) % 4
        hq = quad < 2
        hr = quad % 2 == 0
        q = np.where(hq, rng.uniform(*cfg["high_q"], size=n), rng.uniform(*cfg["low_q"], size=n))
        r = np.where(hr, rng.uniform(*cfg["high_r"], size=n), rng.uniform(*cfg["low_r"], size=n))
        w = rng.uniform(*cfg["weight"], size=n)
        q = np.maximum(q, np.finfo(float).tiny)
        return Instance(K, delta, np.zeros(n), np.ones(n), r, w, q)
    if preset == "attractive":
        cfg = {**ATTRACTIVE_RANGES, **ranges}
        for k in cfg:
            if k not in ATTRACTIVE_RANGES:
                raise InputError(f"unknown attractive range {k!r}")
            cfg[k] = _check_range(cfg[k], k)
        n = 10 if n is None else int(n)
        K = 5 if K is None else int(K)
        if not 1 <= m <= math.ceil(n / 4):
            raise InputError(f"m must lie in [1, ceil(n/4)] = [1, {math.ceil(n / 4)}]")
        r = np.maximum(rng.uniform(*cfg["revenue"], size=n), np.finfo(float).tiny)
        theta = np.where(np.arange(n) < m, rng.uniform(*cfg["theta_high"], size=n),
                         rng.uniform(*cfg["theta_low"], size=n))
        w = np.exp(beta * r + theta)
        return Instance(K, delta, np.zeros(n), np.ones(n), r, w, w)
    raise InputError(f"unknown preset {preset!r} (quadrant or attractive)")


# -- ratings ------------------------------------------------------------------

# column order of the genre flags in a MovieLens-100K style item file
ML_GENRES = ("unknown", "action", "adventure", "animation", "children's", "comedy", "crime",
             "documentary", "drama", "fantasy", "film-noir", "horror", "musical", "mystery",
             "romance", "sci-fi", "thriller", "war", "western")


@dataclass
class RatingsSpec:
    min_raters: int = 5
    min_avg_rating: float = 3.0
    top_n: int = 20
    scale: float = 1.0 / 20
    K: int = 5
    delimiter: str | None = "\t"  # None splits on any whitespace
    genre: str | None = None

    def __post_init__(self):
        if not self.scale > 0:
            raise InputError("scale s must be positive")
        if self.K < 1 or self.top_n < self.K:
            raise InputError("need K >= 1 and top_n >= K")
        if self.min_raters < 0:
            raise InputError("min_raters must be nonnegative")


def parse_ratings(lines, delimiter="\t"):
    """(user, item, rating) rows; extra columns such as timestamps are ignored."""
    users, items, ratings = [], [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(delimiter) if delimiter else line.split()
        if len(parts) < 3:
            raise ParseError(f"expected user, item, rating; got {line!r}", line=lineno)
        try:
            val = float(parts[2])
        except ValueError:
            raise ParseError(f"rating {parts[2]!r} is not a number", line=lineno) from None
        if not math.isfinite(val):
            raise ParseError(f"rating {parts[2]!r} is not finite", line=lineno)
        users.append(parts[0].strip())
        items.append(parts[1].strip())
        ratings.append(val)
    return users, items, np.array(ratings)


def parse_item_genres(lines):
    """item id -> set of genres.

    Accepts MovieLens-100K item rows (pipe separated, 19 trailing 0/1 genre
    flags) or simple rows ``item<TAB>genre|genre``.
    """
    out = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("|")
        if len(parts) >= 5 + len(ML_GENRES):
            flags = parts[-len(ML_GENRES):]
            if not all(f.strip() in ("0", "1") for f in flags):
                raise ParseError("genre flags must be 0 or 1", line=lineno)
            out[parts[0].strip()] = {g for g, f in zip(ML_GENRES, flags) if f.strip() == "1"}
            continue
        head, sep, tail = line.partition("\t")
        if not sep:
            raise ParseError(f"cannot read genres from {line!r}", line=lineno)
        out[head.strip()] = {g.strip().lower() for g in tail.split("|") if g.strip()}
    return out


def _read_lines(src):
    if isinstance(src, (list, tuple)):
        return list(src)
    try:
        with open(src, encoding="latin-1") as fh:
            return fh.readlines()
    except OSError as exc:
        raise InputError(f"cannot read {src}: {exc.strerror}") from None


def ingest_ratings(src, spec: RatingsSpec | None = None, metadata=None, delta=0.0):
    """Market-share instance from ratings: w = s * gamma, q = w, r = 1, a = 0, b = 1.

    ``src`` and ``metadata`` are paths or lists of lines. The genre filter
    needs ``metadata``; without it the filter is skipped with a warning.
    """
    spec = spec or RatingsSpec()
    users, items, ratings = parse_ratings(_read_lines(src), spec.delimiter)
    if not items:
        raise InputError("no ratings found")
    keys, inv = np.unique(np.array(items, dtype=object), return_inverse=True)
    counts = np.bincount(inv)
    gamma = np.bincount(inv, weights=ratings) / counts
    keep = (counts >= spec.min_raters) & (gamma >= spec.min_avg_rating)
    if spec.genre:
        if metadata is None:
            log.warning("genre filter %r skipped: no item metadata given", spec.genre)
        else:
            genres = parse_item_genres(_read_lines(metadata))
            g = spec.genre.lower()
            keep &= np.array([g in genres.get(str(k), ()) for k in keys])
    idx = np.flatnonzero(keep)
    if idx.size < spec.K:
        raise InputError(f"only {idx.size} items survive the filters, need at least K = {spec.K}")
    # highest average first, ties to the smaller id (numeric ids compare numerically)
    def id_key(k):
        s = str(keys[k])
        return (0, int(s), s) if s.isdigit() else (1, 0, s)
    idx = sorted(idx, key=lambda k: (-gamma[k], id_key(k)))[: spec.top_n]
    g = gamma[idx]
    w = spec.scale * g
    n = len(idx)
    return Instance(spec.K, delta, np.zeros(n), np.ones(n), np.ones(n), w, w,
                    tuple(str(keys[k]) for k in idx))


def synthetic_ratings(n_items=20, raters=50, seed=0, gamma_range=(3.14, 4.09), n_filler=10):
    """Stand-in ratings file (as lines) for tests without the external data.

    Each of the ``n_items`` items gets ``raters`` integer ratings whose
    average is within 1/raters of a target drawn from ``gamma_range``.
    ``n_filler`` extra items fail the default filters: half have too few
    raters, half a low average.
    """
    rng = np.random.default_rng(seed)
    lo, hi = _check_range(gamma_range, "gamma_range")
    if lo < 1 or hi > 5:
        raise InputError("gamma_range must lie in [1, 5]")
    rows = []

    def emit(item, target, m):
        base = int(math.floor(target))
        ups = int(round((target - base) * m))
        vals = [min(base + 1, 5)] * ups + [base] * (m - ups)
        order = rng.permutation(m)
        for u in order:
            rows.append(f"{u + 1}\t{item}\t{vals[u]}\t{881250949 + len(rows)}\n")

    for k in range(n_items):
        emit(k + 1, rng.uniform(lo, hi), raters)
    for k in range(n_filler):
        item = n_items + k + 1
        if k % 2 == 0:
            emit(item, rng.uniform(3.5, 4.5), 3)
        else:
            emit(item, rng.uniform(1.5, 2.5), raters)
    return rows


# -- sweeps -------------------------------------------------------------------

@dataclass
class SweepRow:
    instance: int
    delta: float
    objective: float
    unconstrained: float
    pof: float
    support: int
    visibility: np.ndarray
    oracle_calls: int
    wall_time: float


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def deltas(self):
        return sorted({r.delta for r in self.rows})

    def by_instance(self, k):
        return sorted((r for r in self.rows if r.instance == k), key=lambda r: r.delta)

    def aggregate(self):
        """Per delta: mean and std/sqrt(count) of each scalar column."""
        out = []
        for d in self.deltas():
            cell = [r for r in self.rows if r.delta == d]
            agg = {"delta": d, "count": len(cell)}
            for name in ("objective", "unconstrained", "pof", "support", "oracle_calls", "wall_time"):
                v = np.array([getattr(r, name) for r in cell], float)
                agg[name] = float(v.mean())
                agg[name + "_sem"] = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
            agg["visibility"] = np.mean([r.visibility for r in cell], axis=0)
            out.append(agg)
        return out


def unconstrained_optimum(inst: Instance):
    """max_{|S| <= K} rev(S) through the exact capacitated-MNL path at z = 0."""
    S, _ = capacitated_mnl(inst.r, inst.w, inst.K)
    return rev(inst, S), S


def visibility(inst: Instance, sol):
    """Probability that each item is displayed (a = 0, b = 1 weights)."""
    vis_inst = Instance(inst.K, inst.delta, np.zeros(inst.n), np.ones(inst.n), inst.r, inst.w, inst.q, inst.ids)
    return expected_outcomes(vis_inst, sol)


def delta_sweep(instances, deltas, config: SolverConfig | None = None, prune=1e-3):
    instances = list(instances)
    deltas = [float(d) for d in deltas]
    if not instances or not deltas:
        raise InputError("delta_sweep needs at least one instance and one delta")
    config = config or SolverConfig()
    result = SweepResult()
    for k, base in enumerate(instances):
        unc, _ = unconstrained_optimum(base)
        for d in deltas:
            inst = base.with_delta(d)
            rep = solve(inst, config)
            pof = 1.0 - rep.objective / unc if unc > 0 else 0.0
            result.rows.append(SweepRow(k, d, rep.objective, unc, pof, rep.solution.pruned_size(prune),
                                        visibility(inst, rep.solution), rep.oracle_calls, rep.wall_time))
    return result


SWEEP_HEADER = ("delta", "objective", "unconstrained", "pof", "support", "time")


def sweep_table(result: SweepResult, timing=False):
    """Aggregate rows in the fixed column order. Without ``timing`` the time
    column is written as nan so that reruns produce identical files."""
    rows = []
    for agg in result.aggregate():
        rows.append((agg["delta"], agg["objective"], agg["unconstrained"], agg["pof"], agg["support"],
                     agg["wall_time"] if timing else float("nan")))
    return rows


def write_sweep(result: SweepResult, path=None, delimiter=",", timing=False):
    lines = [delimiter.join(SWEEP_HEADER)]
    for row in sweep_table(result, timing):
        lines.append(delimiter.join(repr(float(v)) for v in row))
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def read_sweep(path, delimiter=","):
    lines = _read_lines(path)
    if not lines:
        raise ParseError("empty sweep file", line=1)
    header = tuple(h.strip() for h in lines[0].split(delimiter))
    if header != SWEEP_HEADER:
        raise ParseError(f"unexpected header {header}", line=1)
    rows = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.strip().split(delimiter)
        if len(parts) != len(SWEEP_HEADER):
            raise ParseError(f"expected {len(SWEEP_HEADER)} columns", line=lineno)
        try:
            rows.append(tuple(float(p) for p in parts))
        except ValueError:
            raise ParseError("non-numeric field", line=lineno) from None
    return rows


def sweep_to_dict(result: SweepResult, timing=False):
    cells = []
    for r in result.rows:
        cell = {"instance": r.instance, "delta": r.delta, "objective": r.objective,
                "unconstrained": r.unconstrained, "pof": r.pof, "support": r.support,
                "visibility": [float(v) for v in r.visibility], "oracle_calls": r.oracle_calls}
        if timing:
            cell["wall_time"] = r.wall_time
        cells.append(cell)
    return {"columns": list(SWEEP_HEADER), "cells": cells}


def sweep_from_dict(doc):
    try:
        rows = [SweepRow(c["instance"], float(c["delta"]), float(c["objective"]), float(c["unconstrained"]),
                         float(c["pof"]), int(c["support"]), np.array(c["visibility"], float),
                         int(c["oracle_calls"]), float(c.get("wall_time", float("nan"))))
                for c in doc["cells"]]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed sweep document: {exc}") from None
    return SweepResult(rows)


def fmt(x, digits=6):
    """Six significant digits for tables."""
    return f"{x:.{digits}g}"
