"""Scenario files, experiment runs, random instances and the Kempf-Ness suite.

A scenario is a small JSON document naming a representation, a start point
and the analyses to run::

    {"representation": {"type": "torus", "weights": [[1], [-1]]},
     "space": "affine",
     "start": [[1, 0], [0, 0]],
     "flow": {"max_time": 10000, "grad_tol": 1e-7},
     "analyses": ["classify", "flow", "dichotomy"],
     "seed": 42,
     "output_dir": "./out"}

Complex numbers are ``[re, im]`` pairs; exact rationals in reports are
strings ``"p/q"``.  Analyses always run in the order of :data:`ANALYSES`,
whatever order the file lists them in.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import __version__, git
from .algebra import (
    MATRIX_LIE,
    TORUS,
    Representation,
    make_matrix_rep,
    make_torus_rep,
    maximal_torus_in,
    stabilizer_algebra,
)
from .errors import InputError, IoError, NotTorusKind, ParseError, SchemaError
from .flow import (
    FlowParams,
    FlowTrajectory,
    LimitReport,
    analyze_limit,
    integrate_flow,
    projected_flow,
    projected_moment,
    projective_flow,
    stabilizer_residual,
)
from .prng import SplitMix64
from .symplectic import AFFINE, CHARTS, PROJECTIVE, moment_map, nu_map

ANALYSES = ("classify", "flow", "dichotomy", "projected_flow", "nu", "kempf_ness_ray")
TOP_KEYS = ("representation", "space", "start", "flow", "analyses", "seed", "output_dir")
REQUIRED_KEYS = ("representation", "start", "analyses")
FLOW_KEYS = tuple(f.name for f in fields(FlowParams))
U64_MAX = (1 << 64) - 1
KEMPF_NESS_TIMES = (0.0, 0.5, 1.0, 2.0, 4.0)
SUITE_REPORT_TOL = 1e-5


@dataclass(frozen=True)
class Scenario:
    representation: dict
    start: tuple
    analyses: tuple
    space: str = AFFINE
    flow: FlowParams = field(default_factory=FlowParams)
    seed: int = 0
    output_dir: str = "./out"

    def build_representation(self) -> Representation:
        rep = self.representation
        if rep["type"] == TORUS:
            return make_torus_rep(len(rep["weights"][0]), rep["weights"], rep.get("inner_product"))
        basis = [np.array([[complex(*e) for e in row] for row in mat]) for mat in rep["basis"]]
        return make_matrix_rep(basis, rep.get("inner_product"))

    def start_point(self) -> np.ndarray:
        return np.array(self.start, dtype=complex)


@dataclass
class RunReport:
    """Outcome of :func:`run_scenario`.

    ``results`` maps analysis names to JSON-ready dictionaries; ``timings``
    holds wall-clock seconds and is the only nondeterministic part.
    """

    results: dict
    timings: dict
    version: str
    scenario: dict
    files: tuple = ()

    def to_dict(self, include_timings: bool = True) -> dict:
        out = {"version": self.version, "scenario": self.scenario, "results": self.results}
        if include_timings:
            out["timings"] = self.timings
        return out

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), sort_keys=True, indent=2) + "\n"


# -- parsing -----------------------------------------------------------------


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _complex(v, path: str) -> complex:
    if not (isinstance(v, list) and len(v) == 2 and all(_is_number(c) for c in v)):
        raise SchemaError(path, "expected a [re, im] pair of numbers")
    if not all(np.isfinite(c) for c in v):
        raise SchemaError(path, "complex entries must be finite")
    return complex(float(v[0]), float(v[1]))


def _rational(v, path: str) -> str:
    if _is_number(v) or isinstance(v, str):
        try:
            return str(Fraction(v))
        except (ValueError, ZeroDivisionError):
            pass
    raise SchemaError(path, "expected a rational number or a 'p/q' string")


def _check_keys(obj: Mapping, allowed, path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"{path}.{key}" if path else key, "unknown key")


def _parse_representation(obj) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError("representation", "expected an object")
    kind = obj.get("type")
    if kind not in (TORUS, MATRIX_LIE):
        raise SchemaError("representation.type", f"expected {TORUS!r} or {MATRIX_LIE!r}")
    out: dict = {"type": kind}
    if kind == TORUS:
        _check_keys(obj, ("type", "weights", "inner_product"), "representation")
        w = obj.get("weights")
        if not isinstance(w, list) or not w:
            raise SchemaError("representation.weights", "expected a nonempty integer matrix")
        rows = []
        for i, row in enumerate(w):
            if not isinstance(row, list) or not row or not all(_is_int(v) for v in row):
                raise SchemaError(f"representation.weights[{i}]", "expected a nonempty list of integers")
            if len(row) != len(w[0]):
                raise SchemaError(f"representation.weights[{i}]", "ragged weight matrix")
            rows.append([int(v) for v in row])
        out["weights"] = rows
        m = len(rows[0])
    else:
        _check_keys(obj, ("type", "basis", "inner_product"), "representation")
        b = obj.get("basis")
        if not isinstance(b, list) or not b:
            raise SchemaError("representation.basis", "expected a nonempty list of matrices")
        mats = []
        for a, mat in enumerate(b):
            p = f"representation.basis[{a}]"
            if not isinstance(mat, list) or not mat:
                raise SchemaError(p, "expected a square matrix of [re, im] pairs")
            rows = []
            for i, row in enumerate(mat):
                if not isinstance(row, list) or len(row) != len(mat):
                    raise SchemaError(f"{p}[{i}]", "matrix must be square")
                rows.append([[c.real, c.imag] for c in (_complex(v, f"{p}[{i}][{j}]") for j, v in enumerate(row))])
            if len(rows) != len(out.get("basis", [rows])[0]):
                raise SchemaError(p, "basis matrices differ in size")
            out.setdefault("basis", []).append(rows)
        m = len(out["basis"])
    if "inner_product" in obj:
        ip = obj["inner_product"]
        if not isinstance(ip, list) or len(ip) != m or any(not isinstance(r, list) or len(r) != m for r in ip):
            raise SchemaError("representation.inner_product", f"expected a {m}x{m} matrix")
        out["inner_product"] = [
            [_rational(v, f"representation.inner_product[{i}][{j}]") for j, v in enumerate(row)]
            for i, row in enumerate(ip)
        ]
    return out


def _rep_dim(rep: dict) -> int:
    return len(rep["weights"]) if rep["type"] == TORUS else len(rep["basis"][0])


def scenario_from_dict(doc) -> Scenario:
    """Validate a decoded JSON document; see :func:`parse_scenario`."""
    if not isinstance(doc, dict):
        raise SchemaError("", "top level must be an object")
    _check_keys(doc, TOP_KEYS, "")
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise SchemaError(key, "missing required key")
    rep = _parse_representation(doc["representation"])

    space = doc.get("space", AFFINE)
    if space not in CHARTS:
        raise SchemaError("space", f"expected one of {list(CHARTS)}")

    start = doc["start"]
    if not isinstance(start, list):
        raise SchemaError("start", "expected a list of [re, im] pairs")
    if len(start) != _rep_dim(rep):
        raise SchemaError("start", f"length {len(start)} does not match representation dimension {_rep_dim(rep)}")
    point = tuple(_complex(v, f"start[{i}]") for i, v in enumerate(start))

    flow_doc = doc.get("flow", {})
    if not isinstance(flow_doc, dict):
        raise SchemaError("flow", "expected an object")
    _check_keys(flow_doc, FLOW_KEYS, "flow")
    kwargs = {}
    for key, v in flow_doc.items():
        if key == "extrapolate_terminal":
            if not isinstance(v, bool):
                raise SchemaError("flow.extrapolate_terminal", "expected a boolean")
        elif not _is_number(v):
            raise SchemaError(f"flow.{key}", "expected a number")
        kwargs[key] = v if isinstance(v, bool) else float(v)
    try:
        params = FlowParams(**kwargs)
    except InputError as exc:
        raise SchemaError("flow", str(exc)) from exc

    analyses = doc["analyses"]
    if not isinstance(analyses, list) or not analyses:
        raise SchemaError("analyses", "expected a nonempty list")
    for i, name in enumerate(analyses):
        if name not in ANALYSES:
            raise SchemaError(f"analyses[{i}]", f"unknown analysis {name!r}")
        if name in analyses[:i]:
            raise SchemaError(f"analyses[{i}]", f"duplicate analysis {name!r}")

    seed = doc.get("seed", 0)
    if not _is_int(seed) or not 0 <= seed <= U64_MAX:
        raise SchemaError("seed", "expected an unsigned 64-bit integer")
    out_dir = doc.get("output_dir", "./out")
    if not isinstance(out_dir, str) or not out_dir:
        raise SchemaError("output_dir", "expected a nonempty path string")

    scenario = Scenario(
        representation=rep,
        start=point,
        analyses=tuple(analyses),
        space=space,
        flow=params,
        seed=seed,
        output_dir=out_dir,
    )
    try:
        scenario.build_representation()
    except InputError as exc:
        raise SchemaError("representation", str(exc)) from exc
    return scenario


def parse_scenario(text) -> Scenario:
    """Parse and validate a scenario document (``str`` or UTF-8 ``bytes``).

    Raises
    ------
    ParseError
        Malformed UTF-8 or JSON; carries the character (or byte) position.
    SchemaError
        Structurally valid JSON that breaks the schema; carries the field path.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("invalid UTF-8", exc.start) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.pos) from exc
    return scenario_from_dict(doc)


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "representation": s.representation,
        "space": s.space,
        "start": [[z.real, z.imag] for z in s.start],
        "flow": asdict(s.flow),
        "analyses": list(s.analyses),
        "seed": s.seed,
        "output_dir": s.output_dir,
    }


def serialize_scenario(s: Scenario) -> str:
    """JSON text that :func:`parse_scenario` maps back to ``s``."""
    return json.dumps(scenario_to_dict(s), sort_keys=True, indent=2) + "\n"


# -- serialization of results ------------------------------------------------


def _num(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def _pairs(x) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(x, dtype=complex)]


def _vec(v) -> list | None:
    return None if v is None else [_num(c) for c in v]


def stability_to_dict(rpt: git.StabilityReport) -> dict:
    return {
        "verdict": rpt.verdict.value,
        "support": list(rpt.support),
        "support_weights": [list(map(int, w)) for w in rpt.support_weights],
        "certificate": _vec(rpt.certificate),
        "stabilizer_rank": rpt.stabilizer_rank,
        "certificate_verified": rpt.verify(),
    }


def limit_to_dict(lim: LimitReport) -> dict:
    return {
        "dichotomy": lim.dichotomy.value,
        "mu_norm": float(lim.mu_norm),
        "mu_decay_rate": float(lim.mu_decay_rate),
        "mu_vanishing": lim.mu_vanishing,
        "stabilizer_dim": lim.stabilizer_dim,
        "support": sorted(lim.support),
        "initial_support": sorted(lim.initial_support),
        "witness": _vec(lim.witness),
        "limit_point": _pairs(lim.limit_point),
        "tilde_x": None if lim.tilde_x is None else _pairs(lim.tilde_x),
        "decay_rates": _vec(lim.decay_rates),
        "final_clause": None if lim.final_clause is None else {k: _num(v) for k, v in lim.final_clause.items()},
    }


def trajectory_to_dict(traj: FlowTrajectory, csv_name: str | None) -> dict:
    st = traj.stats
    return {
        "chart": traj.chart,
        "termination": traj.termination.value,
        "final_time": float(traj.t[-1]),
        "samples": len(traj),
        "terminal": _pairs(traj.terminal),
        "terminal_mu_norm_sq": float(traj.mu_norm_sq[-1]),
        "steps": {
            "accepted": st.accepted,
            "rejected_error": st.rejected_error,
            "rejected_energy": st.rejected_energy,
            "max_energy_increase": float(st.max_energy_increase),
        },
        "csv": csv_name,
    }


def trajectory_csv(traj: FlowTrajectory) -> str:
    """``t,re_z1,im_z1,...,re_zd,im_zd,mu_norm_sq,step`` rows, 17 significant digits."""
    d = traj.points.shape[1]
    head = ["t"] + [f"{p}_z{i + 1}" for i in range(d) for p in ("re", "im")] + ["mu_norm_sq", "step"]
    lines = [",".join(head)]
    for t, x, e, h in zip(traj.t, traj.points, traj.mu_norm_sq, traj.step):
        vals = [t]
        for z in x:
            vals.extend((z.real, z.imag))
        vals.extend((e, h))
        lines.append(",".join(f"{float(v):.17g}" for v in vals))
    return "\n".join(lines) + "\n"


class _Writer:
    """Sole writer for one output directory."""

    def __init__(self, directory: str):
        self.directory = directory
        self.written: list[str] = []
        try:
            os.makedirs(directory, exist_ok=True)
        except OSError as exc:
            raise IoError(f"cannot create output directory {directory!r}: {exc}") from exc

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.directory, name)
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {path!r}: {exc}") from exc
        self.written.append(path)
        return path


# -- running -----------------------------------------------------------------


def _run_flow(rep, x, s: Scenario, writer):
    if s.space == PROJECTIVE:
        traj = projective_flow(rep, x, s.flow)
    else:
        traj = integrate_flow(rep, x, s.flow)
    name = None
    if writer is not None:
        name = "trajectory.csv"
        writer.write(name, trajectory_csv(traj))
    out = trajectory_to_dict(traj, name)
    if traj.aligned_time is not None:
        out["aligned_final_time"] = float(traj.aligned_time[-1])
    return traj, out


def _run_projected(rep, x, s: Scenario, writer):
    torus = maximal_torus_in(stabilizer_algebra(rep, x), rep)
    traj = projected_flow(rep, x, torus, s.flow)
    name = None
    if writer is not None:
        name = "trajectory_projected.csv"
        writer.write(name, trajectory_csv(traj))
    out = trajectory_to_dict(traj, name)
    m = projected_moment(rep, traj.terminal, torus)
    out["torus"] = [_vec(v) for v in torus]
    out["mu_perp"] = _vec(m)
    out["mu_perp_norm"] = rep.norm(m)
    out["stabilizer_dim"] = len(stabilizer_algebra(rep, traj.terminal))
    out["stabilizer_residual"] = stabilizer_residual(rep, traj.terminal, m)
    return out


def _run_nu(rep, x):
    nu = nu_map(rep, x)
    mu = moment_map(rep, x, AFFINE)
    return {
        "nu": _vec(nu.value),
        "moment_map": _vec(mu.value),
        "max_difference": float(np.max(np.abs(nu.value - mu.value), initial=0.0)),
    }


def _run_kempf_ness(rep, x):
    """Ray data for the one-parameter subgroup that degenerates ``x``.

    Unstable points use the destabilizer; semistable points the direction
    onto the limit face; polystable points have no degenerating ray.
    """
    if rep.kind != TORUS:
        raise NotTorusKind("kempf_ness_ray needs a torus representation")
    rpt = git.classify_stability(rep, x)
    lam = None
    if rpt.verdict is git.Verdict.UNSTABLE:
        lam = git.destabilizer(rep, x)
    elif rpt.verdict is git.Verdict.SEMISTABLE:
        lam = git.degeneration_direction(rep, x, git.limit_face(rep, x))
    out = {"verdict": rpt.verdict.value, "lambda": None if lam is None else list(lam)}
    if lam is None:
        return out
    nu = nu_map(rep, x)
    # weight of the ray: -<nu(x), lambda>
    weight = -rep.pair(nu.value, np.asarray(lam, dtype=float))
    out.update(
        {
            "asymptotic_slope": _num(git.asymptotic_slope(rep, x, lam)),
            "energy": [[t, git.one_ps_energy(rep, x, lam, t)] for t in KEMPF_NESS_TIMES],
            "weight": weight,
            "weight_nonpositive": weight <= 0,
        }
    )
    return out


def run_scenario(s: Scenario, output_dir: str | None = None, write: bool = True) -> RunReport:
    """Run the requested analyses and persist ``report.json`` plus CSV files.

    Analyses run sequentially in the fixed order of :data:`ANALYSES`.  The
    dichotomy is always read off the affine flow, even for projective
    scenarios.  ``write=False`` skips all file output.
    """
    rep = s.build_representation()
    x = s.start_point()
    writer = _Writer(output_dir or s.output_dir) if write else None
    results: dict = {}
    timings: dict = {}
    traj = None
    for name in ANALYSES:
        if name not in s.analyses:
            continue
        t0 = time.perf_counter()
        if name == "classify":
            results[name] = stability_to_dict(git.classify_stability(rep, x))
        elif name == "flow":
            traj, results[name] = _run_flow(rep, x, s, writer)
        elif name == "dichotomy":
            affine = traj if traj is not None and traj.chart == AFFINE else integrate_flow(rep, x, s.flow)
            results[name] = limit_to_dict(analyze_limit(rep, affine, x))
        elif name == "projected_flow":
            results[name] = _run_projected(rep, x, s, writer)
        elif name == "nu":
            results[name] = _run_nu(rep, x)
        else:
            results[name] = _run_kempf_ness(rep, x)
        timings[name] = time.perf_counter() - t0
    report = RunReport(results=results, timings=timings, version=__version__, scenario=scenario_to_dict(s))
    if writer is not None:
        writer.write("report.json", report.to_json())
        report.files = tuple(writer.written)
    return report


# -- random instances and the Kempf-Ness suite -------------------------------


@dataclass(frozen=True)
class Bounds:
    d_max: int = 6
    r_max: int = 2
    weight_max: int = 3

    def __post_init__(self):
        if self.d_max < 1 or self.r_max < 1 or self.weight_max < 0:
            raise InputError("bounds need d_max >= 1, r_max >= 1, weight_max >= 0")


def random_instance(seed: int, bounds: Bounds | Mapping | None = None) -> tuple[Representation, np.ndarray]:
    """Torus instance drawn from :class:`~mmflow.prng.SplitMix64` seeded with ``seed``.

    Draw order: ``d`` in ``[1, d_max]``, ``r`` in ``[1, r_max]``, the weights
    row by row in ``[-weight_max, weight_max]``, then ``re, im`` of each
    coordinate in ``[-1, 1)``, then one uniform per coordinate, zeroing it
    when below ``1/4``.
    """
    if bounds is None:
        bounds = Bounds()
    elif not isinstance(bounds, Bounds):
        bounds = Bounds(**bounds)
    g = SplitMix64(seed)
    d = g.integer(1, bounds.d_max)
    r = g.integer(1, bounds.r_max)
    w = [[g.integer(-bounds.weight_max, bounds.weight_max) for _ in range(r)] for _ in range(d)]
    x = np.array([complex(g.uniform(-1, 1), g.uniform(-1, 1)) for _ in range(d)])
    for i in range(d):
        if g.uniform() < 0.25:
            x[i] = 0
    return make_torus_rep(r, w), x


@dataclass(frozen=True)
class SuiteRow:
    seed: int
    dim: int
    rank: int
    verdict: str
    outcome: str
    predicted_support: tuple
    limit_support: tuple
    passed: bool

    def line(self) -> str:
        return (
            f"{self.seed:>5} {self.dim:>2} {self.rank:>2} {self.verdict:<11} {self.outcome:<11} "
            f"{_fmt_set(self.predicted_support):<14} {_fmt_set(self.limit_support):<14} "
            f"{'PASS' if self.passed else 'FAIL'}"
        )


def _fmt_set(s) -> str:
    return "{" + ",".join(str(i) for i in s) + "}"


def flow_outcome(lim: LimitReport, report_tol: float = SUITE_REPORT_TOL) -> str:
    """Stability class read off a flow limit.

    ``Polystable``: moment map below tolerance with the support preserved.
    ``Unstable``: the limit is the origin.  ``Semistable``: the moment map
    vanishes while the support shrinks to a nonempty set.
    """
    if lim.mu_norm <= report_tol and lim.support == lim.initial_support:
        return "Polystable"
    if lim.support < lim.initial_support:
        if not lim.support:
            return "Unstable"
        if lim.mu_vanishing:
            return "Semistable"
    return "Inconclusive"


def check_instance(seed: int, bounds: Bounds, params: FlowParams | None = None) -> SuiteRow:
    """Compare the exact verdict with the flow outcome on one seeded instance."""
    rep, x = random_instance(seed, bounds)
    rpt = git.classify_stability(rep, x)
    traj = integrate_flow(rep, x, params)
    lim = analyze_limit(rep, traj, x, report_tol=SUITE_REPORT_TOL)
    outcome = flow_outcome(lim)
    verdict = rpt.verdict
    expected = "Polystable" if verdict.is_polystable else verdict.value
    if verdict.is_polystable:
        predicted = tuple(rpt.support)
    elif verdict is git.Verdict.SEMISTABLE:
        predicted = git.limit_face(rep, x)
    else:
        predicted = ()
    limit_support = tuple(sorted(lim.support))
    passed = outcome == expected and limit_support == predicted
    return SuiteRow(seed, rep.dim, rep.weights.shape[1], verdict.value, outcome, predicted, limit_support, passed)


@dataclass(frozen=True)
class SuiteResult:
    rows: tuple
    bounds: Bounds

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.rows)

    @property
    def all_passed(self) -> bool:
        return self.passed == len(self.rows)

    def table(self) -> str:
        b = self.bounds
        head = (
            f"Kempf-Ness suite: d_max={b.d_max} r_max={b.r_max} weight_max={b.weight_max}\n"
            f"{'seed':>5} {'d':>2} {'r':>2} {'verdict':<11} {'flow':<11} {'predicted':<14} {'limit':<14} result"
        )
        body = [r.line() for r in self.rows]
        tail = f"passed {self.passed}/{len(self.rows)}"
        return "\n".join([head, *body, tail]) + "\n"


def kempf_ness_suite(seeds, bounds: Bounds | None = None, params: FlowParams | None = None) -> SuiteResult:
    """Run :func:`check_instance` over ``seeds`` (an int ``n`` means ``1..n``)."""
    if isinstance(seeds, int):
        seeds = range(1, seeds + 1)
    bounds = bounds or Bounds()
    return SuiteResult(tuple(check_instance(s, bounds, params) for s in seeds), bounds)
