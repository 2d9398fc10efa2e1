"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import json
import math

import numpy as np
import pytest

from moebiuskit.cli import main
from moebiuskit.congruence import (
    central_sphere_point,
    congruence_rank,
    cross_section,
    quotient_surface_data,
    relmetr_residual,
    surface_minimality_residual,
)
from moebiuskit.deform import (
    ImmersionPair,
    elliptic_structure,
    finalkey_residual,
    flatness_and_nullity,
    moebius_congruence_residual,
    theta_form,
)
from moebiuskit.hypersurface import MoebiusTransform, apply_moebius, principal_structure, shape_data
from moebiuskit.moebius import MoebiusPoint

from .conftest import THETAS, example, grid

N = 5
GALLERY = [("round_cylinder", None), ("minimal_cylinder", 0.0), ("minimal_cylinder", math.pi / 6),
           ("minimal_cylinder", math.pi / 3), ("minimal_cylinder", math.pi / 2), ("cone_cylinder", None),
           ("cartan_example", None)]
SURFACE_GRID = [20, 20, 1, 1, 1]
COARSE = 3


@pytest.fixture
def report(capsys):
    def emit(label: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, detail

    return emit


def points(name, counts=COARSE):
    return grid(name, counts)


def test_ac01_invariant_suite(report):
    tr = nrm = 0.0
    for name, theta in GALLERY:
        p = example(name, theta)
        for u in points(name):
            mp = MoebiusPoint(p, u)
            tr = max(tr, abs(np.trace(mp.S)))
            nrm = max(nrm, abs(mp.star_norm_sq(mp.S) - (N - 1) / N))
    report("AC1 Moebius invariant suite", tr <= 1e-9 and nrm <= 1e-8,
           f"max|tr S| = {tr:.2e} (<= 1e-9), max||S||*^2 - 4/5| = {nrm:.2e} (<= 1e-8)")


def test_ac02_round_cylinder_table(report):
    p = example("round_cylinder")
    S_ref = np.diag([4, -1, -1, -1, -1]) / 5
    psi_ref = np.diag([9, -1, -1, -1, -1]) / 50
    err = 0.0
    for u in points("round_cylinder"):
        d = MoebiusPoint(p, u).data()
        err = max(err, abs(d.phi - 1), np.max(np.abs(d.S - S_ref)), np.max(np.abs(d.psi - psi_ref)),
                  np.max(np.abs(d.omega)), abs(d.sStar))
    report("AC2 round-cylinder closed forms", err <= 1e-10, f"max deviation {err:.2e} (<= 1e-10)")


def test_ac03_gauss_codazzi(report):
    worst = {}
    for name, theta in [("round_cylinder", None), ("minimal_cylinder", 0.0), ("minimal_cylinder", math.pi / 3),
                        ("cartan_example", None)]:
        p = example(name, theta)
        g = c = 0.0
        for u in points(name):
            mp = MoebiusPoint(p, u)
            g, c = max(g, mp.gauss_residual()), max(c, mp.codazzi_residual())
        worst[f"{name}({theta})" if theta is not None else name] = (g, c)
    ok = all(g <= 1e-6 and c <= 1e-6 for g, c in worst.values())
    detail = "; ".join(f"{k}: gauss {g:.1e} codazzi {c:.1e}" for k, (g, c) in worst.items())
    report("AC3 conformal Gauss/Codazzi", ok, detail + " (<= 1e-6)")


def test_ac04_two_route_blaschke(report):
    worst = 0.0
    for name, theta in GALLERY:
        p = example(name, theta)
        for u in points(name):
            mp = MoebiusPoint(p, u)
            a, b = mp.blaschke_definition()[0], mp.blaschke_curvature()[0]
            worst = max(worst, np.max(np.abs(a - b)) / (1 + np.max(np.abs(a))))
    report("AC4 two-route Blaschke", worst <= 1e-6, f"max relative gap {worst:.2e} (<= 1e-6)")


def test_ac05_moebius_invariance(report):
    gap_g = gap_s = 0.0
    rng = np.random.default_rng(2024)
    for name, theta in GALLERY:
        p = example(name, theta)
        g = points(name, 2)
        for _ in range(2):
            q = apply_moebius(p, MoebiusTransform.random(N + 1, rng, inversion=True), samples=g)
            a_s, b_s = [], []
            for u in g:
                a, b = MoebiusPoint(p, u), MoebiusPoint(q, u)
                gap_g = max(gap_g, np.max(np.abs(a.gstar - b.gstar)) / np.max(np.abs(a.gstar)))
                a_s.append(a.S)
                b_s.append(b.S)
            a_s, b_s = np.array(a_s), np.array(b_s)
            gap_s = max(gap_s, min(np.max(np.abs(a_s - s * b_s)) for s in (1, -1)))
    report("AC5 Moebius invariance", gap_g <= 1e-7 and gap_s <= 1e-7,
           f"g* relative gap {gap_g:.2e}, S gap after one global sign {gap_s:.2e} (<= 1e-7)")


def test_ac06_bendability_witness(report):
    g = points("minimal_cylinder", SURFACE_GRID)
    lines, ok = [], True
    for theta in THETAS:
        pair = ImmersionPair(example("minimal_cylinder", 0.0), example("minimal_cylinder", theta))
        mg, sg = moebius_congruence_residual(pair, g)
        flat = null = 0.0
        for u in g:
            f, nm = flatness_and_nullity(theta_form(pair, u))
            flat, null = max(flat, f), max(null, nm)
        ok &= mg <= 1e-9 and sg >= 0.1 and flat <= 1e-7 and null >= 0.01
        lines.append(f"theta={theta:.4f}: metricGap {mg:.1e} shapeGap {sg:.3f} flat {flat:.1e} null {null:.3f}")
    report("AC6 Moebius bendability witness", ok, "; ".join(lines))


def test_ac07_central_sphere_congruence(report):
    p = example("minimal_cylinder", 0.0)
    g = points("minimal_cylinder", [5, 5, 2, 1, 2])
    rank = congruence_rank(p, g)
    s2 = min(central_sphere_point(p, u).singular_values[1] for u in g)
    s3 = max(central_sphere_point(p, u).singular_values[2] for u in g)
    spacelike, mres, rres = True, 0.0, 0.0
    for u in g:
        sec = cross_section(p, u)
        sj = quotient_surface_data(p, sec)
        sl, r = surface_minimality_residual(sj)
        spacelike &= sl and bool(np.all(np.linalg.eigvalsh(sj.inducedMetric) > 0))
        mres = max(mres, r)
        rres = max(rres, relmetr_residual(p, sec))
    ok = rank == 2 and s2 >= 1e-3 and s3 <= 1e-9 and spacelike and mres <= 1e-6 and rres <= 1e-8
    report("AC7 central sphere congruence", ok,
           f"rank {rank}, sigma2 >= {s2:.3f}, sigma3 <= {s3:.1e}, spacelike {spacelike}, "
           f"minimality {mres:.1e} (<= 1e-6), relmetr {rres:.1e} (<= 1e-8)")


def test_ac08_finalkey(report):
    g = points("minimal_cylinder", SURFACE_GRID)
    f0 = example("minimal_cylinder", 0.0)
    res = {th: finalkey_residual(ImmersionPair(f0, example("minimal_cylinder", th)), th, g) for th in THETAS}
    zero = finalkey_residual(ImmersionPair(f0, f0), 0.0, g)
    ok = all(r <= 1e-8 for r in res.values()) and zero <= 1e-15
    detail = ", ".join(f"theta={t:.4f}: {r:.1e}" for t, r in res.items())
    report("AC8 associated-family identity", ok, f"{detail} (<= 1e-8); theta=0: {zero:.1e}")


def test_ac09_cartan_example(report):
    p = example("cartan_example")
    g = points("cartan_example")
    c = math.sqrt((N - 1) / (2 * N))
    eig = om = 0.0
    for u in g:
        mp = MoebiusPoint(p, u)
        vals = np.sort(np.linalg.eigvals(mp.S).real)
        eig = max(eig, np.max(np.abs(vals - [-c, 0, 0, 0, c])))
        es = principal_structure(shape_data(p, u))
        om = max(om, np.max(np.abs(mp.blaschke_definition()[1] @ es.DeltaBasis)) / mp.phi)
    coarse = points("cartan_example", 2)
    rank = congruence_rank(p, coarse)
    spacelike, mres = True, 0.0
    for u in coarse:
        sl, r = surface_minimality_residual(quotient_surface_data(p, cross_section(p, u)))
        spacelike &= sl
        mres = max(mres, r)
    es = elliptic_structure(p, coarse)
    ok = (eig <= 1e-6 and om <= 1e-6 and rank == 2 and spacelike and mres <= 1e-5
          and es.kind == "elliptic" and es.symmetry_residual <= 1e-7)
    report("AC9 Cartan example", ok,
           f"S spectrum gap {eig:.1e}, omega on Delta {om:.1e}, rank {rank}, spacelike {spacelike}, "
           f"minimality {mres:.1e}, class {es.kind}, (A-lam I)J asymmetry {es.symmetry_residual:.1e}")


def test_ac10_error_paths(report, tmp_path):
    cases = {
        "UmbilicPoint": {"examples": [{"id": "unit_sphere"}], "checks": ["invariants"]},
        "NoMultiplicityN2": {"examples": [{"id": "round_cylinder"}], "checks": ["elliptic"]},
        "InversionCenterOnImage": {
            "examples": [{"id": "round_cylinder", "transform": {"inversion_center": [1, 0, 0, 0, 0, 0]}}],
            "checks": ["invariants"]},
    }
    lines, ok = [], True
    for want, body in cases.items():
        sc = {"schema": 1, "grid": {"counts": 3}, **body}
        src, out = tmp_path / f"{want}.json", tmp_path / f"{want}.out.json"
        src.write_text(json.dumps(sc))
        code = main(["run", str(src), "--no-timestamp", "--out", str(out)])
        rep = json.loads(out.read_text())
        names = {c["error"]["name"] for c in rep["checks"] if c["error"]}
        good = code == 1 and names == {want} and not any(c["pass"] for c in rep["checks"])
        ok &= good
        lines.append(f"{want}: exit {code}, errors {sorted(names)}")
    report("AC10 error paths", ok, "; ".join(lines))


def test_ac11_negative_control(report):
    rng = np.random.default_rng(11)
    pair = ImmersionPair(example("minimal_cylinder", 0.0), example("minimal_cylinder", math.pi / 2))
    smallest = math.inf
    for u in points("minimal_cylinder", [3, 3, 1, 1, 1]):
        th = theta_form(pair, u)
        for _ in range(5):
            smallest = min(smallest, flatness_and_nullity(th.perturbed(1e-2, rng))[0])
    report("AC11 negative control", smallest >= 1e-3, f"min flatness residual after perturbation {smallest:.2e}"
                                                        " (>= 1e-3)")
