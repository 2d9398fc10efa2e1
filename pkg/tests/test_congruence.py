import math

import numpy as np
import pytest

from moebiuskit.congruence import (
    LinearSection,
    SurfaceJet,
    central_sphere_point,
    congruence_rank,
    cross_section,
    lightlike_hyperplane_gap,
    paper_form,
    quotient_surface_data,
    relmetr_residual,
    section_independence_gap,
    surface_minimality_residual,
)
from moebiuskit.errors import DegenerateInducedMetric, MixedRank, RankNotTwo, SectionTangentToDelta
from moebiuskit.hypersurface import ImmersionPatch, shape_data
from moebiuskit.jets import Jet
from moebiuskit import jets as J
from moebiuskit.lorentz import LightConeChart, mink_inner

from .conftest import NON_UMBILIC, example, grid, interior_point


def catenoid_and_normal(v, w):
    X = np.array([math.cosh(v) * math.cos(w), math.cosh(v) * math.sin(w), v])
    N = np.array([math.cos(w), math.sin(w), -math.sinh(v)]) / math.cosh(v)
    return X, N


class TestCentralSphere:
    @pytest.mark.parametrize("name", NON_UMBILIC)
    def test_de_sitter_and_tangency(self, name):
        p = example(name)
        for u in grid(name, 2):
            cp = central_sphere_point(p, u)
            assert mink_inner(cp.Svec, cp.Svec) == pytest.approx(1.0, abs=1e-10)
            assert np.max(np.abs(mink_inner(cp.dS, cp.Svec))) <= 1e-10

    def test_expansion_identity(self):
        p = example("round_cylinder")
        for u in grid("round_cylinder", 2):
            np.testing.assert_allclose(central_sphere_point(p, u).Svec, paper_form(p, u), atol=1e-12)

    def test_catenoid_closed_form(self):
        p = example("minimal_cylinder", 0.0)
        u = np.array([0.3, -0.6, 0.2, 0.4, -0.1])
        chart = LightConeChart.default(5)
        f = p.point(u)
        N = shape_data(p, u).N
        expected = chart.C @ N - float(f @ N) * chart.w
        np.testing.assert_allclose(central_sphere_point(p, u).Svec, expected, atol=1e-14)

    def test_mean_curvature_is_recovered(self):
        cp = central_sphere_point(example("round_cylinder"), interior_point("round_cylinder"))
        assert cp.H == pytest.approx(0.2)


class TestRank:
    @pytest.mark.parametrize("name,rank", [("minimal_cylinder", 2), ("round_cylinder", 5), ("cartan_example", 2),
                                           ("cone_cylinder", 2)])
    def test_rank(self, name, rank):
        assert congruence_rank(example(name), grid(name, 2)) == rank

    def test_rank_two_singular_value_gap(self):
        sv = central_sphere_point(example("minimal_cylinder", 0.0), interior_point("minimal_cylinder")).singular_values
        assert sv[1] / sv[0] >= 1e-3
        assert sv[2] / sv[0] <= 1e-9

    def test_mixed_rank(self):
        # cylinder over the cubic y = x^3, flat along the inflection line
        n = 3
        p = ImmersionPatch(n, ((-2, 2),) * n, lambda u: [u[0], u[0] ** 3, u[1], u[2]], 1, "cubic")
        with pytest.raises(MixedRank):
            congruence_rank(p, np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]]))


class TestQuotientSurface:
    def test_catenoid_section(self):
        p = example("minimal_cylinder", 0.0)
        v0, w0 = 0.25, -0.4
        u0 = np.array([v0, w0, 0, 0, 0])
        sj = quotient_surface_data(p, cross_section(p, u0))
        X, N = catenoid_and_normal(v0, w0)
        chart = LightConeChart.default(5)
        N6 = np.concatenate([N, np.zeros(3)])
        X6 = np.concatenate([X, np.zeros(3)])
        expected = chart.C @ N6 - float(X6 @ N6) * chart.w
        np.testing.assert_allclose(sj.s, expected, atol=1e-14)
        assert sj.secondPartials.shape == (3, 8)

    def test_section_independence(self):
        p = example("minimal_cylinder", 0.0)
        D = np.array([[1.0, 0, 0, 0, 0], [0, 1.0, 0, 0, 0]])
        first = LinearSection(np.array([0.1, 0.2, 0, 0, 0]), D)
        second = LinearSection(np.array([0.1, 0.2, 1, 1, 1]), D)
        pts = [(0, 0), (0.2, -0.1), (-0.3, 0.4)]
        assert section_independence_gap(p, first, second, pts) <= 1e-9

    def test_relmetr(self):
        p = example("minimal_cylinder", 0.0)
        for u in grid("minimal_cylinder", [3, 3, 1, 1, 1]):
            assert relmetr_residual(p, cross_section(p, u)) <= 1e-8

    @pytest.mark.parametrize("name,tol", [("minimal_cylinder", 1e-6), ("cartan_example", 1e-5)])
    def test_minimal_spacelike(self, name, tol):
        p = example(name)
        for u in grid(name, 2)[::5]:
            spacelike, res = surface_minimality_residual(quotient_surface_data(p, cross_section(p, u)))
            assert spacelike
            assert res <= tol

    def test_totally_geodesic_sphere(self):
        a, b = Jet.variables([0.3, 0.2], 2)
        zero = 0 * a
        s = Jet.stack([zero, J.cos(a) * J.cos(b), J.cos(a) * J.sin(b), J.sin(a), zero, zero])
        spacelike, res = surface_minimality_residual(SurfaceJet.from_jet(s))
        assert spacelike and res <= 1e-12

    def test_degenerate_metric(self):
        a, b = Jet.variables([0.0, 0.0], 2)
        s = Jet.stack([a, 1 + 0 * a, a, b, 0 * a])  # the a-direction is light-like
        with pytest.raises(DegenerateInducedMetric):
            surface_minimality_residual(SurfaceJet.from_jet(s))

    def test_rank_not_two(self):
        p = example("round_cylinder")
        sec = LinearSection(np.zeros(5), np.eye(5)[:2])
        with pytest.raises(RankNotTwo):
            quotient_surface_data(p, sec)

    def test_section_tangent_to_delta(self):
        p = example("minimal_cylinder", 0.0)
        sec = LinearSection(np.zeros(5), np.array([[1.0, 0, 0, 0, 0], [0, 0, 1.0, 0, 0]]))
        with pytest.raises(SectionTangentToDelta):
            quotient_surface_data(p, sec)

    def test_degenerate_hyperplane(self):
        p = example("minimal_cylinder", 0.0)
        assert lightlike_hyperplane_gap(p, grid("minimal_cylinder", [4, 4, 1, 1, 1])) <= 1e-9
