import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmflow.errors import NotTorusKind, ParseError, SchemaError
from mmflow.flow import FlowParams
from mmflow.git import Verdict, classify_stability
from mmflow.scenario import (
    ANALYSES,
    Bounds,
    Scenario,
    check_instance,
    kempf_ness_suite,
    parse_scenario,
    random_instance,
    run_scenario,
    serialize_scenario,
    trajectory_csv,
)
from mmflow.flow import integrate_flow

MINIMAL = {
    "representation": {"type": "torus", "weights": [[1], [-1]]},
    "space": "affine",
    "start": [[1, 0], [0, 0]],
    "flow": {"max_time": 10000, "grad_tol": 1e-7},
    "analyses": ["classify", "flow", "dichotomy"],
    "seed": 42,
    "output_dir": "./out",
}


def doc(**changes):
    d = json.loads(json.dumps(MINIMAL))
    d.update(changes)
    return json.dumps(d)


# -- parsing ----------------------------------------------------------------------


def test_minimal_document():
    s = parse_scenario(json.dumps(MINIMAL))
    assert s.flow == FlowParams()
    assert s.start == (1 + 0j, 0j)
    assert s.analyses == ("classify", "flow", "dichotomy")
    assert s.seed == 42


def test_defaults_filled():
    s = parse_scenario(json.dumps({k: MINIMAL[k] for k in ("representation", "start", "analyses")}))
    assert (s.space, s.seed, s.output_dir, s.flow) == ("affine", 0, "./out", FlowParams())


def test_start_length_mismatch():
    with pytest.raises(SchemaError) as info:
        parse_scenario(doc(start=[[1, 0]]))
    assert info.value.path == "start"


def test_unknown_analysis():
    with pytest.raises(SchemaError) as info:
        parse_scenario(doc(analyses=["classify", "plot"]))
    assert info.value.path == "analyses[1]"


@pytest.mark.parametrize(
    "changes, path",
    [
        ({"colour": 1}, "colour"),
        ({"flow": {"max_time": 1, "speed": 2}}, "flow.speed"),
        ({"flow": {"grad_tol": 2.0}}, "flow"),
        ({"analyses": []}, "analyses"),
        ({"space": "spherical"}, "space"),
        ({"seed": -1}, "seed"),
        ({"seed": 2**64}, "seed"),
        ({"start": [[1, 0], [0]]}, "start[1]"),
        ({"representation": {"type": "torus", "weights": [[1], [0.5]]}}, "representation.weights[1]"),
        ({"representation": {"type": "torus", "weights": [[1]], "extra": 1}}, "representation.extra"),
        ({"representation": {"type": "group"}}, "representation.type"),
    ],
)
def test_schema_errors(changes, path):
    with pytest.raises(SchemaError) as info:
        parse_scenario(doc(**changes))
    assert info.value.path == path


def test_matrix_rep_validation_surfaces_as_schema_error():
    bad = {"type": "matrix_lie", "basis": [[[[0, 0], [1, 0]], [[0, 0], [0, 0]]]]}
    with pytest.raises(SchemaError) as info:
        parse_scenario(doc(representation=bad, start=[[1, 0], [0, 0]]))
    assert info.value.path == "representation"


def test_parse_error_position():
    text = '{"representation": {"type": "torus",, }'
    with pytest.raises(ParseError) as info:
        parse_scenario(text)
    assert info.value.position == text.index(",,") + 1
    with pytest.raises(ParseError):
        parse_scenario(b"\xff\xfe")


def test_missing_required_key():
    with pytest.raises(SchemaError) as info:
        parse_scenario(json.dumps({"representation": MINIMAL["representation"], "start": [[1, 0], [0, 0]]}))
    assert info.value.path == "analyses"


scenarios = st.builds(
    lambda w, start, analyses, space, seed, mt, rational: {
        "representation": {"type": "torus", "weights": w}
        | ({"inner_product": [["3/2" if i == j else 0 for j in range(len(w[0]))] for i in range(len(w[0]))]} if rational else {}),
        "space": space,
        "start": [[a, b] for a, b in start[: len(w)]] + [[0, 0]] * max(0, len(w) - len(start)),
        "flow": {"max_time": mt},
        "analyses": analyses,
        "seed": seed,
    },
    st.integers(1, 3).flatmap(lambda r: st.lists(st.lists(st.integers(-3, 3), min_size=r, max_size=r), min_size=1, max_size=4)),
    st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=0, max_size=4),
    st.lists(st.sampled_from(ANALYSES), min_size=1, max_size=6, unique=True),
    st.sampled_from(["affine", "projective"]),
    st.integers(0, 2**64 - 1),
    st.floats(1e-3, 1e6),
    st.booleans(),
)


@given(scenarios)
def test_round_trip(d):
    s = parse_scenario(json.dumps(d))
    assert parse_scenario(serialize_scenario(s)) == s


def test_round_trip_matrix_rep():
    basis = [[[[0, 1], [0, 0]], [[0, 0], [0, -1]]]]
    s = parse_scenario(doc(representation={"type": "matrix_lie", "basis": basis}))
    assert parse_scenario(serialize_scenario(s)) == s
    assert s.build_representation().rank == 1


# -- running ---------------------------------------------------------------------


def test_run_axis_example(tmp_path):
    s = parse_scenario(doc(output_dir=str(tmp_path)))
    report = run_scenario(s)
    res = report.results
    assert res["classify"]["verdict"] == "Unstable"
    assert np.linalg.norm(res["flow"]["terminal"]) < 0.02
    assert res["dichotomy"]["dichotomy"] == "OrbitClosureOnly"
    assert list(res) == ["classify", "flow", "dichotomy"]
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["results"] == json.loads(json.dumps(res))
    assert set(on_disk["timings"]) == {"classify", "flow", "dichotomy"}


def test_classify_only_writes_no_csv(tmp_path):
    s = parse_scenario(doc(start=[[1, 0], [1, 0]], analyses=["classify"], output_dir=str(tmp_path)))
    report = run_scenario(s)
    assert report.results["classify"]["verdict"] == "Stable"
    assert report.results["classify"]["certificate"] == ["1/2", "1/2"]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["report.json"]


def test_fixed_order_regardless_of_listing(tmp_path):
    s = parse_scenario(doc(analyses=["nu", "dichotomy", "classify"], output_dir=str(tmp_path)))
    assert list(run_scenario(s).results) == ["classify", "dichotomy", "nu"]


def test_reports_identical_modulo_timings(tmp_path):
    s = parse_scenario(doc(analyses=list(ANALYSES)))
    a = run_scenario(s, output_dir=str(tmp_path / "a"))
    b = run_scenario(s, output_dir=str(tmp_path / "b"))
    assert a.to_json(include_timings=False) == b.to_json(include_timings=False)
    ja = json.loads((tmp_path / "a" / "report.json").read_text())
    jb = json.loads((tmp_path / "b" / "report.json").read_text())
    ja.pop("timings"), jb.pop("timings")
    assert ja == jb
    for name in ("trajectory.csv", "trajectory_projected.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_format(tmp_path):
    s = parse_scenario(doc(analyses=["flow"], flow={"max_time": 50}, output_dir=str(tmp_path)))
    report = run_scenario(s)
    raw = (tmp_path / "trajectory.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "t,re_z1,im_z1,re_z2,im_z2,mu_norm_sq,step"
    assert len(lines) - 1 == report.results["flow"]["samples"]
    row = [float(v) for v in lines[-1].split(",")]
    assert row[0] == 50.0
    traj = integrate_flow(s.build_representation(), s.start_point(), s.flow)
    assert row[1] == traj.terminal[0].real  # 17 significant digits round-trip exactly


def test_csv_rows_match_samples():
    s = parse_scenario(doc())
    traj = integrate_flow(s.build_representation(), s.start_point(), FlowParams(max_time=20.0))
    text = trajectory_csv(traj)
    assert text.endswith("\n") and text.count("\n") == len(traj) + 1


def test_all_analyses_on_projective_space(tmp_path):
    s = parse_scenario(doc(space="projective", start=[[0.3, 0], [0.1, 0.1]], analyses=list(ANALYSES), output_dir=str(tmp_path)))
    res = run_scenario(s).results
    assert res["flow"]["chart"] == "projective"
    assert "aligned_final_time" in res["flow"]
    assert res["dichotomy"]["dichotomy"] == "InOrbit"
    assert res["nu"]["max_difference"] <= 1e-12
    assert res["kempf_ness_ray"] == {"verdict": "Stable", "lambda": None}


def test_kempf_ness_ray_unstable(tmp_path):
    s = parse_scenario(doc(analyses=["kempf_ness_ray"], output_dir=str(tmp_path)))
    ray = run_scenario(s).results["kempf_ness_ray"]
    assert ray["lambda"] == [-1]
    assert ray["asymptotic_slope"] == "-1/1"
    energies = [e for _, e in ray["energy"]]
    assert energies == sorted(energies, reverse=True)
    assert ray["weight_nonpositive"]


def test_kempf_ness_ray_needs_torus(tmp_path):
    basis = [[[[0, 1], [0, 0]], [[0, 0], [0, -1]]]]
    s = parse_scenario(doc(representation={"type": "matrix_lie", "basis": basis}, analyses=["kempf_ness_ray"]))
    with pytest.raises(NotTorusKind):
        run_scenario(s, output_dir=str(tmp_path))


def test_projected_flow_report(tmp_path):
    rep = {"type": "torus", "weights": [[1, 0], [-1, 0], [0, 1]]}
    s = parse_scenario(doc(representation=rep, start=[[1, 0], [0.5, 0], [0, 0]], analyses=["projected_flow"], output_dir=str(tmp_path)))
    res = run_scenario(s).results["projected_flow"]
    assert len(res["torus"]) == 1
    assert res["stabilizer_residual"] <= 1e-5
    assert (tmp_path / "trajectory_projected.csv").exists()


def test_run_without_writing(tmp_path):
    s = parse_scenario(doc(output_dir=str(tmp_path / "never")))
    report = run_scenario(s, write=False)
    assert report.files == ()
    assert not (tmp_path / "never").exists()


# -- random instances -----------------------------------------------------------


@given(st.integers(0, 2**64 - 1))
def test_random_instance_deterministic(seed):
    bounds = Bounds(6, 2, 3)
    rep_a, x_a = random_instance(seed, bounds)
    rep_b, x_b = random_instance(seed, {"d_max": 6, "r_max": 2, "weight_max": 3})
    np.testing.assert_array_equal(rep_a.weights, rep_b.weights)
    np.testing.assert_array_equal(x_a, x_b)
    assert 1 <= rep_a.dim <= 6 and 1 <= rep_a.weights.shape[1] <= 2
    assert np.abs(rep_a.weights).max() <= 3
    assert np.all(np.abs(x_a.real) <= 1) and np.all(np.abs(x_a.imag) <= 1)


def test_random_instance_pinned_draws():
    rep, x = random_instance(1, Bounds(6, 2, 3))
    from mmflow.prng import SplitMix64

    g = SplitMix64(1)
    d, r = g.integer(1, 6), g.integer(1, 2)
    assert rep.weights.shape == (d, r)
    assert [list(row) for row in rep.weights] == [[g.integer(-3, 3) for _ in range(r)] for _ in range(d)]


@pytest.mark.parametrize("seed", range(1, 11))
def test_trivial_action_is_polystable(seed):
    rep, x = random_instance(seed, Bounds(6, 2, 0))
    assert classify_stability(rep, x).verdict.is_polystable


def test_bounds_validation():
    with pytest.raises(ValueError):
        Bounds(0, 1, 1)
    with pytest.raises(ValueError):
        Bounds(1, 1, -1)


def test_suite_rows():
    result = kempf_ness_suite([1, 2, 3], Bounds(4, 2, 2))
    assert len(result.rows) == 3
    table = result.table()
    assert table.splitlines()[-1] == f"passed {result.passed}/3"
    assert all(("PASS" in line) or ("FAIL" in line) for line in table.splitlines()[2:-1])
    row = check_instance(2, Bounds(4, 2, 2))
    assert row == result.rows[1]
