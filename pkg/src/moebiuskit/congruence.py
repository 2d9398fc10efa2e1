"""Central sphere congruence of a hypersurface and its quotient surface.

The congruence is the map x -> S(x) into the de Sitter space of unit space-like
vectors of L^{n+3}.  It is evaluated in the form

    S = H Psi(f) + dPsi_f(N),

which equals (1/r) Psi(h) + (r/2) w for the centre h = f + r N with r = 1/H,
and stays finite at H = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInducedMetric, MixedRank, RankNotTwo, SectionTangentToDelta
from .hypersurface import (
    ImmersionPatch,
    point_shape,
    principal_structure,
    shape_jets,
)
from .jets import Jet
from .lorentz import LightConeChart, lightcone_differential, lightcone_embed, lorentz_project_out, mink_gram, mink_inner

RANK_RTOL = 1e-9
SECTION_RTOL = 1e-6
SPACELIKE_RTOL = 1e-8


@dataclass
class CongruencePoint:
    u: np.ndarray
    Svec: np.ndarray
    dS: np.ndarray  # (n, n+3), row i is d_i S
    rank: int
    singular_values: np.ndarray
    H: float


@dataclass
class SurfaceJet:
    s: np.ndarray
    firstPartials: np.ndarray  # (2, n+3)
    secondPartials: np.ndarray  # (3, n+3): aa, ab, bb
    inducedMetric: np.ndarray

    @classmethod
    def from_jet(cls, sj: Jet) -> "SurfaceJet":
        """Read off a surface jet from an order >= 2 vector jet in two variables."""
        if sj.dim != 2 or sj.order < 2:
            raise ValueError("need an order-2 jet in two variables")
        d = [sj.diff(0), sj.diff(1)]
        first = np.array([np.asarray(x.value) for x in d])
        second = np.array([np.asarray(d[0].diff(0).value), np.asarray(d[0].diff(1).value),
                           np.asarray(d[1].diff(1).value)])
        return cls(np.asarray(sj.value), first, second, mink_gram(first))


@dataclass(frozen=True)
class LinearSection:
    """The 2-chart (a, b) -> origin + a X1 + b X2 of the hypersurface chart."""

    origin: np.ndarray
    directions: np.ndarray  # (2, n)

    def __call__(self, p: Sequence[float]) -> np.ndarray:
        return np.asarray(self.origin) + np.asarray(p, dtype=float) @ np.asarray(self.directions)


def sphere_congruence_jet(patch: ImmersionPatch, u: Sequence[float], chart: LightConeChart | None = None) -> Jet:
    """Order-2 jet of S at ``u`` (chart variables of the patch)."""
    chart = chart or LightConeChart.default(patch.n)
    sj = shape_jets(patch, u)
    F = sj.F.truncate(2)
    return lightcone_embed(chart, F) * sj.H + lightcone_differential(chart, F, sj.N)


def _rank(dS: np.ndarray, rtol: float = RANK_RTOL) -> tuple[int, np.ndarray]:
    sv = np.linalg.svd(dS, compute_uv=False)
    if sv[0] == 0:
        return 0, sv
    return int(np.sum(sv > rtol * sv[0])), sv


def central_sphere_point(patch: ImmersionPatch, u: Sequence[float],
                         chart: LightConeChart | None = None) -> CongruencePoint:
    chart = chart or LightConeChart.default(patch.n)
    sj = sphere_congruence_jet(patch, u, chart)
    S = np.asarray(sj.value)
    dS = np.array([np.asarray(sj.diff(i).value) for i in range(patch.n)])
    rank, sv = _rank(dS)
    # <S, w> = H <Psi, w> + <dPsi(N), w> = H
    H = float(mink_inner(S, chart.w))
    return CongruencePoint(np.asarray(u, dtype=float), S, dS, rank, sv, H)


def paper_form(patch: ImmersionPatch, u: Sequence[float], chart: LightConeChart | None = None) -> np.ndarray:
    """(1/r) Psi(h) + (r/2) w with r = 1/H; only defined when H != 0."""
    chart = chart or LightConeChart.default(patch.n)
    shape = point_shape(shape_jets(patch, u))
    if shape.H == 0:
        raise ZeroDivisionError("the centre of the sphere is at infinity when H = 0")
    r = 1.0 / shape.H
    h = patch.point(u) + r * shape.N
    return lightcone_embed(chart, h) / r + 0.5 * r * chart.w


def multiplicity_of_mean_curvature(patch: ImmersionPatch, u: Sequence[float], tol: float = 1e-6) -> int:
    """How many principal curvatures coincide with H at ``u``."""
    shape = point_shape(shape_jets(patch, u))
    k = shape.principal_values
    scale = max(float(np.max(np.abs(k))), 1.0)
    return int(np.sum(np.abs(k - shape.H) <= tol * scale))


def congruence_rank(patch: ImmersionPatch, grid: np.ndarray, tol: float = RANK_RTOL) -> int:
    """Constant rank of the central sphere congruence over ``grid``.

    Also checks the rank criterion: rank k with 0 < k < n forces H to be a
    principal curvature of multiplicity n - k, and full rank forbids it.
    """
    ranks = []
    for u in np.atleast_2d(grid):
        cp = central_sphere_point(patch, u)
        r = int(np.sum(cp.singular_values > tol * cp.singular_values[0]))
        mult = multiplicity_of_mean_curvature(patch, u)
        if r != patch.n - mult and not (r == patch.n and mult == 0):
            raise MixedRank(f"rank {r} at u = {u.tolist()} but H has multiplicity {mult}")
        ranks.append(r)
    distinct = sorted(set(ranks))
    if len(distinct) != 1:
        raise MixedRank(f"congruence rank varies over the grid: {distinct}")
    return distinct[0]


def cross_section(patch: ImmersionPatch, u0: Sequence[float], tol: float = 1e-6) -> LinearSection:
    """Linear section through ``u0`` along the principal directions orthogonal to Delta."""
    es = principal_structure(point_shape(shape_jets(patch, u0)), tol)
    return LinearSection(np.asarray(u0, dtype=float), es.crossBasis.T.copy())


def quotient_surface_jet(patch: ImmersionPatch, section: LinearSection, p: Sequence[float] = (0.0, 0.0)) -> Jet:
    u = section(p)
    S = sphere_congruence_jet(patch, u)
    dS = np.array([np.asarray(S.diff(i).value) for i in range(patch.n)])
    rank, sv = _rank(dS)
    if rank != 2:
        raise RankNotTwo(f"congruence rank {rank} at u = {u.tolist()}")
    D = np.asarray(section.directions)
    sv_sec = np.linalg.svd(D @ dS, compute_uv=False)
    if sv_sec[-1] <= SECTION_RTOL * sv[0] * max(np.linalg.norm(D, axis=1).min(), 1e-300):
        raise SectionTangentToDelta(f"section directions collapse under dS (singular values {sv_sec})")
    ab = Jet.variables([0.0, 0.0], 2)
    inner = [ab[0] * D[0, i] + ab[1] * D[1, i] for i in range(patch.n)]
    return S.substitute(inner)


def quotient_surface_data(patch: ImmersionPatch, section: LinearSection,
                          p: Sequence[float] = (0.0, 0.0)) -> SurfaceJet:
    """Order-2 data of the quotient surface s(a, b) = S(section(a, b))."""
    return SurfaceJet.from_jet(quotient_surface_jet(patch, section, p))


def section_independence_gap(patch: ImmersionPatch, first: LinearSection, second: LinearSection,
                             points: Sequence[Sequence[float]]) -> float:
    """max |s_1(p) - s_2(p)| for two sections meeting the same leaves at equal parameters."""
    gap = 0.0
    for p in points:
        a = np.asarray(sphere_congruence_jet(patch, first(p)).value)
        b = np.asarray(sphere_congruence_jet(patch, second(p)).value)
        gap = max(gap, float(np.max(np.abs(a - b))))
    return gap


def surface_minimality_residual(sj: SurfaceJet) -> tuple[bool, float]:
    """(space-like flag, coordinate norm of the mean curvature vector of s in S_1^{n+2})."""
    G = sj.inducedMetric
    evals = np.linalg.eigvalsh(G)
    tr = float(abs(np.trace(G)))
    if np.min(np.abs(evals)) <= SPACELIKE_RTOL * tr:
        raise DegenerateInducedMetric(f"induced metric eigenvalues {evals}")
    spacelike = bool(np.all(evals > SPACELIKE_RTOL * tr))
    basis = np.vstack([sj.s, sj.firstPartials])
    second = np.array([lorentz_project_out(x, basis) for x in sj.secondPartials])
    Gi = np.linalg.inv(G)
    mean = 0.5 * (Gi[0, 0] * second[0] + 2 * Gi[0, 1] * second[1] + Gi[1, 1] * second[2])
    return spacelike, float(np.linalg.norm(mean))


def relmetr_residual(patch: ImmersionPatch, section: LinearSection, p: Sequence[float] = (0.0, 0.0),
                     tol: float = 1e-6) -> float:
    """Relative gap between the metric induced by s and <(A - lam I) X_a, (A - lam I) X_b>."""
    u = section(p)
    shape = point_shape(shape_jets(patch, u))
    lam = principal_structure(shape, tol).lam
    D = np.asarray(section.directions)
    B = (shape.A - lam * np.eye(patch.n)) @ D.T
    rhs = B.T @ shape.g @ B
    lhs = quotient_surface_data(patch, section, p).inducedMetric
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(lhs)), 1e-300))


def lightlike_hyperplane_gap(patch: ImmersionPatch, grid: np.ndarray) -> float:
    """Spread of <S, w> over the grid; zero when s lies in a degenerate hyperplane <s, w> = const."""
    w = LightConeChart.default(patch.n).w
    vals = [float(mink_inner(central_sphere_point(patch, u).Svec, w)) for u in np.atleast_2d(grid)]
    return float(max(vals) - min(vals))
