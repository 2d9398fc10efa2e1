import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moebiuskit import jets as J
from moebiuskit.errors import UmbilicPoint
from moebiuskit.hypersurface import MoebiusTransform, apply_moebius, principal_structure, shape_data
from moebiuskit.jets import jet_eval
from moebiuskit.moebius import (
    MoebiusPoint,
    blaschke_form,
    blaschke_via_curvature,
    christoffel,
    conformal_codazzi_residual,
    conformal_gauss_residual,
    moebius_data,
    moebius_invariants,
    riemann_at_center,
    star_connection,
)

from .conftest import NON_UMBILIC, example, grid, interior_point

N = 5


class TestConnection:
    def test_diagonal_metric_hand_formula(self):
        x, y = 0.4, -0.3
        E = lambda a, b: 1 + a * a + 0.5 * b
        G = lambda a, b: 2 + a * b
        g = jet_eval(lambda u: [[1 + u[0] * u[0] + 0.5 * u[1], 0.0 * u[0]], [0.0 * u[0], 2 + u[0] * u[1]]], [x, y], 2)
        gam = np.asarray(christoffel(g).value)
        Ex, Ey, Gx, Gy = 2 * x, 0.5, y, x
        e, gg = E(x, y), G(x, y)
        expected = np.array([
            [[Ex / (2 * e), Ey / (2 * e)], [Ey / (2 * e), -Gx / (2 * e)]],
            [[-Ey / (2 * gg), Gx / (2 * gg)], [Gx / (2 * gg), Gy / (2 * gg)]],
        ])
        np.testing.assert_allclose(gam, expected, atol=1e-14)

    def test_round_sphere_ricci(self):
        # d theta^2 + sin^2 theta d phi^2 has Ric = g
        th = 1.1
        g = jet_eval(lambda u: [[1.0 + 0 * u[0], 0 * u[0]], [0 * u[0], J.sin(u[0]) ** 2]], [th, 0.2], 3)
        R = riemann_at_center(christoffel(g))
        ric = np.einsum("iijk->jk", R)
        np.testing.assert_allclose(ric, np.diag([1.0, math.sin(th) ** 2]), atol=1e-13)
        np.testing.assert_allclose(R, -R.transpose(0, 2, 1, 3), atol=1e-14)

    def test_round_cylinder_flat(self):
        np.testing.assert_allclose(star_connection(example("round_cylinder"), interior_point("round_cylinder")), 0,
                                   atol=1e-14)

    @pytest.mark.parametrize("name", ["minimal_cylinder", "cartan_example"])
    def test_conformal_change_identity(self, name):
        mp = MoebiusPoint(example(name), interior_point(name))
        d = np.asarray(mp.phi_jet.gradient().value) / mp.phi
        gi = np.linalg.inv(mp.g)
        I = np.eye(N)
        delta = np.einsum("ki,j->kij", I, d) + np.einsum("kj,i->kij", I, d) - np.einsum("ij,k->kij", mp.g, gi @ d)
        np.testing.assert_allclose(mp.Gamma - np.asarray(mp.gamma.value), delta, atol=1e-10)


class TestClosedForms:
    def test_round_cylinder(self):
        p, u = example("round_cylinder"), interior_point("round_cylinder")
        d = moebius_invariants(p, u)
        assert d.phi == pytest.approx(1.0, abs=1e-10)
        np.testing.assert_allclose(d.gStar, shape_data(p, u).g, atol=1e-10)
        np.testing.assert_allclose(d.S, np.diag([4, -1, -1, -1, -1]) / 5, atol=1e-10)
        np.testing.assert_allclose(d.psi, np.diag([9, -1, -1, -1, -1]) / 50, atol=1e-10)
        np.testing.assert_allclose(d.omega, 0, atol=1e-10)
        assert d.sStar == pytest.approx(0.0, abs=1e-10)

    def test_round_cylinder_curvature_route(self):
        psi, s_star = blaschke_via_curvature(example("round_cylinder"), interior_point("round_cylinder"))
        assert np.trace(psi) == pytest.approx(0.1, abs=1e-12)
        assert s_star == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("v", [-0.6, 0.0, 0.45])
    def test_catenoid_phi(self, v):
        d = moebius_data(example("minimal_cylinder", 0.0), [v, 0.3, 0.1, 0.2, -0.4])
        assert d.phi == pytest.approx(math.sqrt(2.5) / math.cosh(v) ** 2, rel=1e-12)
        c = math.sqrt(0.4)
        np.testing.assert_allclose(np.sort(np.linalg.eigvals(d.S).real), [-c, 0, 0, 0, c], atol=1e-12)
        assert d.psi is None

    def test_catenoid_omega_vanishes_on_delta(self):
        p, u = example("minimal_cylinder", 0.0), interior_point("minimal_cylinder")
        _, omega = blaschke_form(p, u)
        es = principal_structure(shape_data(p, u))
        np.testing.assert_allclose(omega @ es.DeltaBasis, 0, atol=1e-12)

    def test_minimal_omega_formula(self):
        mp = MoebiusPoint(example("cartan_example"), interior_point("cartan_example"))
        dphi = np.asarray(mp.phi_jet.gradient().value)
        _, omega = mp.blaschke_definition()
        np.testing.assert_allclose(omega, -(mp.S.T @ dphi) / mp.phi, atol=1e-12)

    def test_unit_sphere_is_umbilic(self):
        with pytest.raises(UmbilicPoint):
            moebius_data(example("unit_sphere"), interior_point("unit_sphere"))


class TestStructureEquations:
    @pytest.mark.parametrize("name", NON_UMBILIC)
    def test_invariant_suite(self, name):
        p = example(name)
        for u in grid(name, 2):
            mp = MoebiusPoint(p, u)
            assert abs(np.trace(mp.S)) <= 1e-9
            assert abs(mp.star_norm_sq(mp.S) - (N - 1) / N) <= 1e-8

    @pytest.mark.parametrize("name", NON_UMBILIC)
    def test_gauss_codazzi(self, name):
        p = example(name)
        for u in grid(name, 2):
            assert conformal_gauss_residual(p, u) <= 1e-6
            assert conformal_codazzi_residual(p, u) <= 1e-6

    def test_round_cylinder_exact(self):
        p, u = example("round_cylinder"), interior_point("round_cylinder")
        assert conformal_gauss_residual(p, u) <= 1e-10
        assert conformal_codazzi_residual(p, u) <= 1e-10

    @pytest.mark.parametrize("name", NON_UMBILIC)
    def test_two_route_blaschke(self, name):
        p = example(name)
        for u in grid(name, 2):
            mp = MoebiusPoint(p, u)
            a = mp.blaschke_definition()[0]
            b = mp.blaschke_curvature()[0]
            assert np.max(np.abs(a - b)) <= 1e-6 * (1 + np.max(np.abs(a)))

    def test_codazzi_invariant_under_normal_flip(self):
        p, u = example("cone_cylinder"), interior_point("cone_cylinder")
        a = MoebiusPoint(p, u)
        b = MoebiusPoint(p.flipped(), u)
        np.testing.assert_allclose(b.S, -a.S, atol=1e-14)
        np.testing.assert_allclose(b.blaschke_definition()[1], -a.blaschke_definition()[1], atol=1e-14)
        assert b.codazzi_residual() == pytest.approx(a.codazzi_residual(), abs=1e-14)

    def test_wrong_wedge_sign_is_rejected(self):
        # R* vanishes on the round cylinder, so the sign is pinned on a curved example
        mp = MoebiusPoint(example("minimal_cylinder", 0.0), interior_point("minimal_cylinder"))
        R, rhs = mp.gauss_terms()
        assert np.max(np.abs(R + rhs)) > 0.1


class TestMoebiusInvariance:
    @settings(max_examples=8, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.sampled_from(NON_UMBILIC))
    def test_random_similarity_and_inversion(self, seed, name):
        rng = np.random.default_rng(seed)
        p = example(name)
        u = interior_point(name, 0.61)
        q = apply_moebius(p, MoebiusTransform.random(N + 1, rng), samples=[u])
        a, b = moebius_data(p, u), moebius_data(q, u)
        assert np.max(np.abs(a.gStar - b.gStar)) <= 1e-7 * np.max(np.abs(a.gStar))
        assert min(np.max(np.abs(a.S - s * b.S)) for s in (1, -1)) <= 1e-7
