"""Scenario runner: build examples, sweep grids, run checks, assemble reports.

A scenario is a JSON object::

    {
      "schema": 1,
      "name": "catenoid vs helicoid",
      "examples": [{"id": "minimal_cylinder", "params": {"theta": 0.0}},
                   {"id": "minimal_cylinder", "params": {"theta": 1.5707963267948966}}],
      "grid": {"counts": [5, 5, 1, 1, 1], "window": null},
      "checks": ["wang", "theta"],
      "tolerances": {"theta.flatness": 1e-7},
      "expect": {"wang": {"congruent": false}},
      "seed": 0
    }

Each check reports one or more metrics.  An "upper" metric passes when its
maximum over the grid is at most its bound, a "lower" metric when its minimum
is at least its bound, and an "info" metric is recorded without a verdict.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__
from .congruence import (
    central_sphere_point,
    congruence_rank,
    cross_section,
    quotient_surface_data,
    relmetr_residual,
    surface_minimality_residual,
)
from .deform import (
    ImmersionPair,
    SplittingData,
    elliptic_structure,
    finalkey_residual,
    flatness_and_nullity,
    is_moebius_congruent,
    moebius_congruence_residual,
    theta_form,
)
from .errors import ConfigInvalid, GeometryError, InvalidSpec
from .gallery import CATALOG, EXAMPLE_IDS, ExampleSpec, catalog_entry, default_window, make_example
from .hypersurface import MoebiusTransform, apply_moebius, tensor_grid
from .moebius import MoebiusPoint

SCHEMA_VERSION = 1
MAX_POINTS = 20000

SINGLE_CHECKS = ("invariants", "gauss", "codazzi", "blaschke2route", "congruence_rank",
                 "sphere_surface", "splitting", "elliptic")
PAIR_CHECKS = ("theta", "wang", "finalkey")
ALL_CHECKS = SINGLE_CHECKS + PAIR_CHECKS

# (kind, bound) per metric; kind is "upper", "lower" or "info"
DEFAULT_BOUNDS = {
    "invariants.trace_S": ("upper", 1e-9),
    "invariants.norm_S": ("upper", 1e-8),
    "gauss.gauss": ("upper", 1e-6),
    "codazzi.codazzi": ("upper", 1e-6),
    "blaschke2route.psi_gap": ("upper", 1e-6),
    "congruence_rank.upper_ratio": ("upper", 1e-9),
    "congruence_rank.lower_ratio": ("lower", 1e-3),
    "sphere_surface.minimality": ("upper", 1e-6),
    "sphere_surface.relmetr": ("upper", 1e-8),
    "sphere_surface.spacelike": ("lower", 1e-8),
    "theta.flatness": ("upper", 1e-7),
    "theta.symmetry": ("upper", 1e-10),
    "theta.nullity": ("info", None),
    "wang.metric_gap": ("upper", 1e-6),
    "wang.shape_gap": ("upper", 1e-6),
    "splitting.confmetrics": ("upper", 1e-7),
    "elliptic.confmetrics": ("upper", 1e-7),
    "elliptic.j_square": ("upper", 1e-12),
    "elliptic.classification": ("upper", 0.0),
    "finalkey.finalkey": ("upper", 1e-8),
}


# ---------------------------------------------------------------------------
# scenario parsing


@dataclass
class ExampleEntry:
    spec: ExampleSpec
    transform: dict | None = None


@dataclass
class Scenario:
    examples: list[ExampleEntry]
    checks: list[str]
    counts: list[int]
    window: list[tuple[float, float]]
    tolerances: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)
    seed: int = 0
    name: str = ""
    raw: dict = field(default_factory=dict)


def _require(cond: bool, message: str, path: str):
    if not cond:
        raise ConfigInvalid(message, path)


def _number(x, path: str) -> float:
    _require(isinstance(x, (int, float)) and not isinstance(x, bool), "expected a number", path)
    _require(math.isfinite(float(x)), "expected a finite number", path)
    return float(x)


def _parse_example(obj, path: str) -> ExampleEntry:
    _require(isinstance(obj, dict), "expected an object", path)
    unknown = set(obj) - {"id", "n", "params", "transform"}
    _require(not unknown, f"unknown keys {sorted(unknown)}", path)
    _require(obj.get("id") in EXAMPLE_IDS, f"id must be one of {list(EXAMPLE_IDS)}", f"{path}.id")
    n = obj.get("n", 5)
    _require(isinstance(n, int) and not isinstance(n, bool), "expected an integer", f"{path}.n")
    params = obj.get("params", {})
    _require(isinstance(params, dict), "expected an object", f"{path}.params")
    for k, v in params.items():
        _number(v, f"{path}.params.{k}")
    spec = ExampleSpec(obj["id"], n, {k: float(v) for k, v in params.items()})
    try:
        spec.validate()
    except InvalidSpec as exc:
        raise ConfigInvalid(str(exc), path) from None
    transform = obj.get("transform")
    if transform is not None:
        _require(isinstance(transform, dict), "expected an object", f"{path}.transform")
        keys = set(transform)
        allowed = {"random", "inversion", "center_scale", "scale", "rotation", "shift", "inversion_center"}
        _require(keys <= allowed, f"unknown keys {sorted(keys - allowed)}", f"{path}.transform")
        dim = n + 1
        for key in ("shift", "inversion_center"):
            if key in transform:
                vec = transform[key]
                _require(isinstance(vec, list) and len(vec) == dim, f"expected {dim} numbers",
                         f"{path}.transform.{key}")
                for i, x in enumerate(vec):
                    _number(x, f"{path}.transform.{key}[{i}]")
        if "rotation" in transform:
            Q = transform["rotation"]
            _require(isinstance(Q, list) and len(Q) == dim and all(isinstance(r, list) and len(r) == dim for r in Q),
                     f"expected a {dim}x{dim} matrix", f"{path}.transform.rotation")
            Qa = np.array(Q, dtype=float)
            _require(np.allclose(Qa @ Qa.T, np.eye(dim), atol=1e-10), "matrix is not orthogonal",
                     f"{path}.transform.rotation")
        if "scale" in transform:
            _require(_number(transform["scale"], f"{path}.transform.scale") > 0, "scale must be positive",
                     f"{path}.transform.scale")
    return ExampleEntry(spec, transform)


def parse_scenario(obj: Any) -> Scenario:
    """Validate a decoded scenario; raises ConfigInvalid with a JSON path."""
    _require(isinstance(obj, dict), "scenario must be a JSON object", "$")
    allowed = {"schema", "name", "examples", "grid", "checks", "tolerances", "expect", "seed"}
    unknown = set(obj) - allowed
    _require(not unknown, f"unknown keys {sorted(unknown)}", "$")
    _require(obj.get("schema") == SCHEMA_VERSION, f"schema must be {SCHEMA_VERSION}", "$.schema")

    exs = obj.get("examples")
    _require(isinstance(exs, list) and 1 <= len(exs) <= 2, "expected a list of one or two examples", "$.examples")
    examples = [_parse_example(e, f"$.examples[{i}]") for i, e in enumerate(exs)]
    n = examples[0].spec.n
    _require(all(e.spec.n == n for e in examples), "paired examples must share n", "$.examples")

    checks = obj.get("checks")
    _require(isinstance(checks, list) and checks, "expected a non-empty list", "$.checks")
    for i, c in enumerate(checks):
        _require(c in ALL_CHECKS, f"unknown check {c!r}", f"$.checks[{i}]")
        if c in PAIR_CHECKS:
            _require(len(examples) == 2, f"check {c!r} needs two examples", f"$.checks[{i}]")
    _require(len(set(checks)) == len(checks), "duplicate checks", "$.checks")

    grid = obj.get("grid", {})
    _require(isinstance(grid, dict), "expected an object", "$.grid")
    _require(set(grid) <= {"counts", "window"}, "grid accepts 'counts' and 'window'", "$.grid")
    window = grid.get("window")
    if window is None:
        window = default_window(examples[0].spec)
    else:
        _require(isinstance(window, list) and len(window) == n, f"expected {n} intervals", "$.grid.window")
        parsed = []
        for i, w in enumerate(window):
            p = f"$.grid.window[{i}]"
            _require(isinstance(w, list) and len(w) == 2, "expected [lo, hi]", p)
            lo, hi = _number(w[0], p), _number(w[1], p)
            _require(lo <= hi, "lo must not exceed hi", p)
            parsed.append((lo, hi))
        window = parsed
    for e in examples:
        dom = CATALOG[e.spec.id]["domain"](n)
        for i, ((lo, hi), (dlo, dhi)) in enumerate(zip(window, dom)):
            _require(dlo < lo and hi < dhi, f"interval [{lo}, {hi}] leaves the chart domain ({dlo}, {dhi})",
                     f"$.grid.window[{i}]")
    counts = grid.get("counts", 3)
    if isinstance(counts, int) and not isinstance(counts, bool):
        counts = [counts] * n
    _require(isinstance(counts, list) and len(counts) == n, f"expected an integer or {n} integers", "$.grid.counts")
    for i, c in enumerate(counts):
        _require(isinstance(c, int) and not isinstance(c, bool) and c >= 1, "expected a positive integer",
                 f"$.grid.counts[{i}]")
    _require(int(np.prod(counts)) <= MAX_POINTS, f"grid exceeds {MAX_POINTS} points", "$.grid.counts")

    tol = obj.get("tolerances", {})
    _require(isinstance(tol, dict), "expected an object", "$.tolerances")
    for k, v in tol.items():
        key = _metric_key(k)
        _require(key is not None, f"unknown tolerance key {k!r}", f"$.tolerances.{k}")
        _number(v, f"$.tolerances.{k}")

    expect = obj.get("expect", {})
    _require(isinstance(expect, dict), "expected an object", "$.expect")
    for k, v in expect.items():
        _require(k in ALL_CHECKS, f"unknown check {k!r}", f"$.expect.{k}")
        _require(isinstance(v, dict), "expected an object", f"$.expect.{k}")
    if "wang" in expect:
        _require(set(expect["wang"]) <= {"congruent"}, "wang accepts 'congruent'", "$.expect.wang")
    if "theta" in expect:
        _require(set(expect["theta"]) <= {"null"}, "theta accepts 'null'", "$.expect.theta")
    if "elliptic" in expect:
        _require(expect["elliptic"].get("kind") in ("surfaceLike", "elliptic", "other"),
                 "kind must be surfaceLike, elliptic or other", "$.expect.elliptic.kind")
    if "congruence_rank" in expect:
        r = expect["congruence_rank"].get("rank")
        _require(isinstance(r, int) and 0 <= r <= n, f"rank must be an integer in 0..{n}",
                 "$.expect.congruence_rank.rank")
    if "finalkey" in expect:
        _require(set(expect["finalkey"]) <= {"theta"}, "finalkey accepts 'theta'", "$.expect.finalkey")
        _number(expect["finalkey"].get("theta", 0.0), "$.expect.finalkey.theta")

    seed = obj.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool), "expected an integer", "$.seed")
    name = obj.get("name", "")
    _require(isinstance(name, str), "expected a string", "$.name")
    return Scenario(examples, list(checks), list(counts), [tuple(w) for w in window],
                    dict(tol), dict(expect), seed, name, obj)


def _metric_key(k: str) -> str | None:
    if k in DEFAULT_BOUNDS:
        return k
    matches = [m for m in DEFAULT_BOUNDS if m.split(".")[0] == k]
    return matches[0] if len(matches) == 1 else None


# ---------------------------------------------------------------------------
# checks


class Metrics:
    """Collects per-point values of named metrics."""

    def __init__(self, check: str):
        self.check = check
        self.values: dict[str, list[float]] = {}

    def add(self, name: str, value: float):
        self.values.setdefault(name, []).append(float(value))


def _check_invariants(ctx, patch, grid, m: Metrics, details: dict):
    n = patch.n
    for k, u in enumerate(grid):
        mp = MoebiusPoint(patch, u)
        m.add("trace_S", abs(np.trace(mp.S)))
        m.add("norm_S", abs(mp.star_norm_sq(mp.S) - (n - 1) / n))
        if k == 0:
            d = mp.data()
            details.update(u=u, phi=d.phi, S=d.S, psi=d.psi, omega=d.omega, sStar=d.sStar)


def _check_gauss(ctx, patch, grid, m, details):
    for u in grid:
        m.add("gauss", MoebiusPoint(patch, u).gauss_residual())


def _check_codazzi(ctx, patch, grid, m, details):
    for u in grid:
        m.add("codazzi", MoebiusPoint(patch, u).codazzi_residual())


def _check_blaschke(ctx, patch, grid, m, details):
    for u in grid:
        mp = MoebiusPoint(patch, u)
        psi_def = mp.blaschke_definition()[0]
        psi_curv = mp.blaschke_curvature()[0]
        m.add("psi_gap", np.max(np.abs(psi_def - psi_curv)) / (1 + np.max(np.abs(psi_def))))


def _check_rank(ctx, patch, grid, m, details):
    rank = congruence_rank(patch, grid)
    expected = ctx.expect.get("congruence_rank", {}).get("rank", rank)
    details.update(rank=rank, expected_rank=expected)
    for u in grid:
        sv = central_sphere_point(patch, u).singular_values
        m.add("upper_ratio", sv[expected] / sv[0] if expected < len(sv) else 0.0)
        m.add("lower_ratio", sv[expected - 1] / sv[0] if expected > 0 else 1.0)


def _check_sphere_surface(ctx, patch, grid, m, details):
    for u in grid:
        sec = cross_section(patch, u)
        sj = quotient_surface_data(patch, sec)
        spacelike, res = surface_minimality_residual(sj)
        evals = np.linalg.eigvalsh(sj.inducedMetric)
        m.add("minimality", res)
        m.add("relmetr", relmetr_residual(patch, sec))
        m.add("spacelike", evals[0] / abs(np.trace(sj.inducedMetric)))


def _check_splitting(ctx, patch, grid, m, details):
    for k, u in enumerate(grid):
        sd = SplittingData(patch, u)
        for j, st in enumerate(sd.tensors()):
            m.add("confmetrics", st.confmetrics_residual)
            if k == 0 and j == 0:
                details.update(u=u, C=st.C, Cstar=st.Cstar)


def _check_elliptic(ctx, patch, grid, m, details):
    es = elliptic_structure(patch, grid)
    want = ctx.expect.get("elliptic", {}).get("kind")
    details.update(kind=es.kind, j_sign=es.j_sign, j_component=es.j_component,
                   span_I_residual=es.span_I_residual, span_IJ_residual=es.span_IJ_residual,
                   symmetry_residual=es.symmetry_residual, expected_kind=want)
    m.add("confmetrics", es.confmetrics_residual)
    m.add("j_square", es.j_square_residual)
    m.add("classification", 0.0 if want in (None, es.kind) else 1.0)


def _check_theta(ctx, pair, grid, m, details):
    for u in grid:
        th = theta_form(pair, u)
        flat, null = flatness_and_nullity(th)
        m.add("flatness", flat)
        m.add("nullity", null)
        m.add("symmetry", th.symmetry_defect())


def _check_wang(ctx, pair, grid, m, details):
    mgap, sgap = moebius_congruence_residual(pair, grid)
    m.add("metric_gap", mgap)
    m.add("shape_gap", sgap)
    details.update(congruent=is_moebius_congruent(mgap, sgap))


def _check_finalkey(ctx, pair, grid, m, details):
    theta = ctx.finalkey_theta
    details.update(theta=theta)
    m.add("finalkey", finalkey_residual(pair, theta, grid))


CHECKS: dict[str, Callable] = {
    "invariants": _check_invariants,
    "gauss": _check_gauss,
    "codazzi": _check_codazzi,
    "blaschke2route": _check_blaschke,
    "congruence_rank": _check_rank,
    "sphere_surface": _check_sphere_surface,
    "splitting": _check_splitting,
    "elliptic": _check_elliptic,
    "theta": _check_theta,
    "wang": _check_wang,
    "finalkey": _check_finalkey,
}

METRIC_NAMES = {c: [k.split(".", 1)[1] for k in DEFAULT_BOUNDS if k.split(".")[0] == c] for c in ALL_CHECKS}


# ---------------------------------------------------------------------------
# running


@dataclass
class _Context:
    scenario: Scenario
    tol_scale: float

    @property
    def expect(self) -> dict:
        return self.scenario.expect

    @property
    def finalkey_theta(self) -> float:
        if "theta" in self.expect.get("finalkey", {}):
            return float(self.expect["finalkey"]["theta"])
        th = [float(e.spec.params.get("theta", 0.0)) for e in self.scenario.examples]
        return th[1] - th[0]

    def bound(self, check: str, metric: str) -> tuple[str, float | None]:
        key = f"{check}.{metric}"
        kind, bound = DEFAULT_BOUNDS[key]
        if check == "wang" and not self.expect.get("wang", {}).get("congruent", True):
            kind, bound = {"metric_gap": ("upper", 1e-9), "shape_gap": ("lower", 0.1)}[metric]
        if key == "theta.nullity" and "null" in self.expect.get("theta", {}):
            kind, bound = ("upper", 1e-7) if self.expect["theta"]["null"] else ("lower", 0.01)
        for k, v in self.scenario.tolerances.items():
            if _metric_key(k) == key:
                bound = float(v)
                if kind == "info":
                    kind = "upper"
        if kind == "upper":
            bound *= self.tol_scale
        return kind, bound


def _build_patch(entry: ExampleEntry, rng: np.random.Generator, grid: np.ndarray):
    """The example patch (after its optional transform) and the realized transform."""
    patch = make_example(entry.spec)
    tr = entry.transform
    if tr is None:
        return patch, None
    dim = entry.spec.n + 1
    if tr.get("random"):
        T = MoebiusTransform.random(dim, rng, inversion=bool(tr.get("inversion", True)),
                                    center_scale=float(tr.get("center_scale", 10.0)))
    else:
        T = MoebiusTransform(
            scale=float(tr.get("scale", 1.0)),
            rotation=None if "rotation" not in tr else np.array(tr["rotation"], dtype=float),
            shift=None if "shift" not in tr else np.array(tr["shift"], dtype=float),
            inversion_center=None if "inversion_center" not in tr else np.array(tr["inversion_center"], dtype=float),
        )
    return apply_moebius(patch, T, samples=grid), T.to_dict()


def _stats(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    return {"max": float(np.max(arr)), "mean": float(np.mean(arr)), "min": float(np.min(arr))}


def _verdict(kind: str, bound, stats: dict) -> bool | None:
    if kind == "upper":
        return bool(stats["max"] <= bound)
    if kind == "lower":
        return bool(stats["min"] >= bound)
    return None


def run_scenario(scenario: Scenario | dict, tol_scale: float = 1.0, seed: int | None = None,
                 timestamp: bool = True) -> dict:
    """Run every check of a scenario and return the report as plain data."""
    if not isinstance(scenario, Scenario):
        scenario = parse_scenario(scenario)
    if not (tol_scale > 0 and math.isfinite(tol_scale)):
        raise ConfigInvalid("tol-scale must be a positive number", "--tol-scale")
    if seed is not None:
        scenario.seed = int(seed)
    ctx = _Context(scenario, tol_scale)
    grid = tensor_grid(scenario.window, scenario.counts)
    rng = np.random.default_rng(scenario.seed)

    build_error = None
    patches, transforms = [], []
    for e in scenario.examples:
        try:
            patch, realized = _build_patch(e, rng, grid)
        except GeometryError as exc:
            build_error = build_error or exc
            patch, realized = None, None
        patches.append(patch)
        transforms.append(realized)

    results = []
    for check in scenario.checks:
        targets = ["pair"] if check in PAIR_CHECKS else [f"examples[{i}]" for i in range(len(scenario.examples))]
        for k, target in enumerate(targets):
            results.append(_run_one(ctx, check, target, k, patches, grid, build_error, timestamp))

    n_pass = sum(1 for r in results if r["pass"])
    report = {
        "schema": SCHEMA_VERSION,
        "tool": {"name": "moebiuskit", "version": __version__},
        "scenario": scenario.raw,
        "seed": scenario.seed,
        "tol_scale": tol_scale,
        "grid": {"counts": scenario.counts, "window": [list(w) for w in scenario.window], "points": len(grid)},
        "transforms": transforms,
        "checks": results,
        "summary": {"checks": len(results), "passed": n_pass, "failed": len(results) - n_pass,
                    "all_pass": n_pass == len(results)},
    }
    if timestamp:
        report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return report


def _run_one(ctx: _Context, check: str, target: str, index: int, patches, grid, build_error, timing: bool) -> dict:
    out: dict = {"check": check, "target": target}
    metrics = Metrics(check)
    details: dict = {}
    t0 = time.perf_counter()
    error = build_error
    if error is None:
        subject = ImmersionPair(patches[0], patches[1]) if target == "pair" else patches[index]
        try:
            CHECKS[check](ctx, subject, grid, metrics, details)
        except GeometryError as exc:
            error = exc
    wall = time.perf_counter() - t0

    mets = {}
    ok = error is None
    for name in METRIC_NAMES[check]:
        kind, bound = ctx.bound(check, name)
        entry = {"kind": kind, "bound": bound}
        vals = metrics.values.get(name)
        if vals:
            entry.update(_stats(vals))
            entry["pass"] = _verdict(kind, bound, entry)
            if entry["pass"] is False:
                ok = False
        else:
            entry["pass"] = None if kind == "info" else False
        mets[name] = entry
    out["pass"] = ok
    out["status"] = "pass" if ok else ("error" if error is not None else "fail")
    out["points"] = len(grid) if error is None else 0
    out["metrics"] = mets
    out["error"] = None if error is None else {"name": error.name, "message": str(error)}
    if details:
        out["details"] = details
    if timing:
        out["wall_time_s"] = wall
    return out


def list_examples(n: int = 5) -> list[dict]:
    return [catalog_entry(i, max(n, CATALOG[i]["min_n"])) for i in EXAMPLE_IDS]


# ---------------------------------------------------------------------------
# JSON with 17 significant digits


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return format(x, ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Serialize plain data and numpy values; floats use 17 significant digits."""
    import json

    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.integer,)):
        obj = int(obj)
    if isinstance(obj, np.bool_):
        obj = bool(obj)
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(to_json(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")
