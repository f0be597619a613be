import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_instance
from fairassort import io
from fairassort.errors import InputError, ParseError
from fairassort.harness import (
    SWEEP_HEADER,
    RatingsSpec,
    SyntheticSpec,
    benchmark_spec,
    delta_sweep,
    fmt,
    gen_synthetic,
    gen_two_group,
    ingest_ratings,
    parse_item_genres,
    parse_ratings,
    read_sweep,
    sweep_from_dict,
    sweep_to_dict,
    synthetic_ratings,
    unconstrained_optimum,
    write_sweep,
)
from fairassort.instance import DistributionSolution, brute_force_subdual
from fairassort.solver import SolverConfig, solve


# -- generators -------------------------------------------------------------------

def test_synthetic_defaults():
    insts = gen_synthetic(benchmark_spec(-1.0, instance_count=3, seed=1))
    assert len(insts) == 3
    for inst in insts:
        assert inst.n == 10 and inst.K == 5
        np.testing.assert_array_equal(inst.q, inst.w)
        assert inst.is_visibility_fair
        assert np.all((inst.r > 0) & (inst.r < 1))
        theta = np.log(inst.w) + inst.r
        assert np.all((theta >= 0) & (theta <= 0.5 + 1e-12))


def test_synthetic_zero_beta():
    inst = gen_synthetic(SyntheticSpec(n=6, K=2, beta=0.0, seed=3))[0]
    theta = np.log(inst.w)
    assert np.all((theta >= 0) & (theta <= 0.5 + 1e-12))
    # weights do not depend on revenues: same theta stream with another beta differs only through r
    other = gen_synthetic(SyntheticSpec(n=6, K=2, beta=-1.0, seed=3))[0]
    np.testing.assert_allclose(np.log(other.w), theta - other.r, atol=1e-12)


def test_synthetic_deterministic():
    a = gen_synthetic(benchmark_spec(-0.1, 4, seed=9))
    b = gen_synthetic(benchmark_spec(-0.1, 4, seed=9))
    assert io.save_instances(a) == io.save_instances(b)


@pytest.mark.parametrize("kw", [{"beta": 0.5}, {"K": 11}, {"theta_range": (1, 0)}, {"quality_rule": "x"},
                                {"quality_rule": "custom", "quality": (1.0,)}, {"revenue_range": (-1, 1)}])
def test_synthetic_rejects(kw):
    with pytest.raises(InputError):
        SyntheticSpec(**kw)


def test_quadrant_ranges():
    inst = gen_two_group("quadrant", seed=2)
    assert inst.n == 4 and inst.K == 2
    assert np.all(inst.q[:2] >= 0.5) and np.all(inst.q[2:] <= 0.5)
    assert inst.r[0] >= 0.6 and inst.r[2] >= 0.6 and inst.r[1] <= 0.6 and inst.r[3] <= 0.6
    np.testing.assert_array_equal(inst.w, 1.0)


def test_quadrant_point_masses():
    inst = gen_two_group("quadrant", n=8, K=3, high_q=(0.9, 0.9), low_q=(0.2, 0.2), high_r=(0.7, 0.7),
                         low_r=(0.3, 0.3), weight=(2.0, 2.0))
    np.testing.assert_array_equal(inst.q, [0.9, 0.9, 0.2, 0.2] * 2)
    np.testing.assert_array_equal(inst.r, [0.7, 0.3] * 4)
    np.testing.assert_array_equal(inst.w, 2.0)


def test_attractive_attractive_items():
    inst = gen_two_group("attractive", seed=4, m=2, beta=-1.0)
    theta = np.log(inst.w) + inst.r
    assert np.all(theta[:2] >= 0.4) and np.all(theta[2:] <= 0.4)
    np.testing.assert_array_equal(inst.q, inst.w)
    with pytest.raises(InputError):
        gen_two_group("attractive", m=4)
    with pytest.raises(InputError):
        gen_two_group("fig3")


# -- ratings ----------------------------------------------------------------------------

def test_parse_ratings_line_numbers():
    with pytest.raises(ParseError) as exc:
        parse_ratings(["1\t2\t3\n", "\n", "1\t2\n"])
    assert exc.value.line == 3
    with pytest.raises(ParseError) as exc:
        parse_ratings(["1\t2\tfive\n"])
    assert exc.value.line == 1


def test_ingest_small_file():
    rows = []
    for item, vals in {"10": [5, 4, 4, 5, 5], "11": [3, 3, 4, 3, 3], "12": [5, 5], "13": [1, 2, 2, 2, 2],
                       "14": [4, 4, 4, 4, 4]}.items():
        rows += [f"{u}\t{item}\t{v}\n" for u, v in enumerate(vals)]
    inst = ingest_ratings(rows, RatingsSpec(K=2, top_n=3))
    assert inst.ids == ("10", "14", "11")
    np.testing.assert_allclose(inst.w, np.array([4.6, 4.0, 3.2]) / 20)
    np.testing.assert_array_equal(inst.r, 1.0)
    np.testing.assert_array_equal(inst.q, inst.w)
    with pytest.raises(InputError):
        ingest_ratings(rows, RatingsSpec(K=4, top_n=4))


def test_ingest_equal_ratings_gives_uniform_weights():
    rows = [f"{u}\t{i}\t4\n" for i in range(6) for u in range(5)]
    inst = ingest_ratings(rows, RatingsSpec(K=2, top_n=6))
    np.testing.assert_allclose(inst.w, 4 / 20)
    rep = solve(inst.with_delta(0.0), SolverConfig(oracle="half"))
    vis = rep.solution
    assert rep.checks["fair"] and vis.total_mass() <= 1 + 1e-9


def test_genre_filter_and_missing_metadata(caplog):
    rows = [f"{u}\t{i}\t4\n" for i in range(1, 5) for u in range(5)]
    meta = ["1\tDrama\n", "2\tdrama|comedy\n", "3\tComedy\n", "4\tdrama\n"]
    inst = ingest_ratings(rows, RatingsSpec(K=2, top_n=4, genre="drama"), metadata=meta)
    assert inst.ids == ("1", "2", "4")
    inst = ingest_ratings(rows, RatingsSpec(K=2, top_n=4, genre="drama"))
    assert inst.n == 4
    assert "skipped" in caplog.text


def test_movielens_item_rows():
    flags = ["0"] * 19
    flags[8] = "1"  # drama
    row = "7|Title (1995)|01-Jan-1995||http://x|" + "|".join(flags) + "\n"
    assert parse_item_genres([row]) == {"7": {"drama"}}


def test_standin_ratings():
    rows = synthetic_ratings(seed=5)
    inst = ingest_ratings(rows)
    assert inst.n == 20 and inst.K == 5
    gamma = inst.w * 20
    assert np.all(gamma >= 3.14 - 0.02) and np.all(gamma <= 4.09 + 0.02)
    assert np.all(np.diff(gamma) <= 0)
    assert rows == synthetic_ratings(seed=5)


# -- sweeps ----------------------------------------------------------------------------------

def test_unconstrained_matches_enumeration(rng):
    for _ in range(20):
        inst = random_instance(rng, kind="visibility")
        val, _ = unconstrained_optimum(inst)
        assert val == pytest.approx(brute_force_subdual(inst, np.zeros((inst.n, inst.n))).value, abs=1e-9)


@pytest.fixture(scope="module")
def small_sweep():
    insts = gen_synthetic(SyntheticSpec(n=6, K=3, beta=-1.0, seed=2, instance_count=3))
    return delta_sweep(insts, [0.0, 0.5, 1.0, 1e6], SolverConfig(oracle="brute"))


def test_sweep_invariants(small_sweep):
    for k in range(3):
        rows = small_sweep.by_instance(k)
        objs = [r.objective for r in rows]
        assert all(b >= a - 1e-9 for a, b in zip(objs, objs[1:]))
        for r in rows:
            assert -1e-9 <= r.pof <= 1 + 1e-9
            assert 1 <= r.support <= 6 * 5 + 1
            assert r.visibility.sum() <= 3 + 1e-9
        assert rows[-1].pof == pytest.approx(0.0, abs=1e-9)


def test_sweep_aggregate(small_sweep):
    agg = small_sweep.aggregate()
    assert [a["delta"] for a in agg] == [0.0, 0.5, 1.0, 1e6]
    cell = [r.pof for r in small_sweep.rows if r.delta == 0.0]
    assert agg[0]["pof"] == pytest.approx(np.mean(cell))
    assert agg[0]["pof_sem"] == pytest.approx(np.std(cell, ddof=1) / np.sqrt(3))


def test_sweep_file_roundtrip(small_sweep, tmp_path):
    path = tmp_path / "s.csv"
    text = write_sweep(small_sweep, path)
    assert text.splitlines()[0] == ",".join(SWEEP_HEADER)
    rows = read_sweep(str(path))
    assert len(rows) == 4 and all(np.isnan(r[-1]) for r in rows)
    assert write_sweep(small_sweep) == text
    back = sweep_from_dict(json.loads(io.dump_json(sweep_to_dict(small_sweep))))
    assert write_sweep(back) == text


def test_read_sweep_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ParseError):
        read_sweep(str(p))


def test_fmt():
    assert fmt(1 / 3) == "0.333333"
    assert fmt(123456789.0) == "1.23457e+08"


# -- documents ---------------------------------------------------------------------------------

@given(st.integers(0, 10**6))
def test_instance_document_roundtrip(seed):
    inst = random_instance(np.random.default_rng(seed))
    back = io.instance_from_dict(json.loads(io.save_instance(inst)))
    for f in ("a", "b", "r", "w", "q"):
        np.testing.assert_array_equal(getattr(back, f), getattr(inst, f))
    assert (back.K, back.delta, back.ids) == (inst.K, inst.delta, inst.ids)


@pytest.mark.parametrize("doc", [
    [], {"K": 1, "delta": 0}, {"K": 1, "delta": 0, "items": []},
    {"K": 1, "delta": 0, "n": 2, "items": [{"id": 1, "w": 1, "r": 1, "q": 1, "a": 0, "b": 1}]},
    {"K": 1, "delta": 0, "items": [{"id": 1, "w": 1, "r": 1, "q": 1, "a": 0}]},
    {"K": 1, "delta": 0, "items": [{"id": 1, "w": "1", "r": 1, "q": 1, "a": 0, "b": 1}]},
    {"K": True, "delta": 0, "items": [{"id": 1, "w": 1, "r": 1, "q": 1, "a": 0, "b": 1}]},
])
def test_instance_document_rejects(doc):
    with pytest.raises(InputError):
        io.instance_from_dict(doc)


def test_bad_json_has_line(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{\n  "K": 1,\n  oops\n}\n')
    with pytest.raises(ParseError) as exc:
        io.load_instance(str(p))
    assert exc.value.line == 3


def test_solution_document_uses_ids(rng):
    inst = random_instance(rng, n_range=(4, 4))
    sol = DistributionSolution({(0, 2): 0.25, (3,): 0.75}, 0.4)
    doc = io.solution_to_dict(inst, sol)
    assert doc["support"][0]["items"] == ["1", "3"]
    assert io.solution_from_dict(inst, doc).support == sol.support


def test_load_dual_checks(tmp_path):
    p = tmp_path / "z.json"
    p.write_text(json.dumps({"z": [[0, 1], [0.5, 0]]}))
    np.testing.assert_array_equal(io.load_dual(str(p), 2), [[0, 1], [0.5, 0]])
    with pytest.raises(InputError):
        io.load_dual(str(p), 3)
    p.write_text(json.dumps([[0, -1], [0, 0]]))
    with pytest.raises(InputError):
        io.load_dual(str(p), 2)
