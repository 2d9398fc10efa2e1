"""Pairs of hypersurfaces sharing a Moebius metric.

Contents: the flat bilinear form Theta with values in R^{2,2}, the Moebius
congruence test, the splitting tensor of the eigenbundle Delta, the
surface-like / elliptic classification and the associated-family identity
(A - lam I) J_theta = +-phi (A_theta - H_theta I).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import EigenvectorFieldNonSmooth, MetricMismatch, MetricNotConformal
from .hypersurface import EigenStructure, ImmersionPatch, point_shape, principal_structure, shape_jets
from .jets import Jet, eye, matmul
from .lorentz import SIG22
from .moebius import MoebiusPoint

METRIC_TOL = 1e-7
CONGRUENT_TOL = 1e-6
J_COMPONENT_MIN = 1e-3
SPAN_TOL = 1e-6


@dataclass(frozen=True)
class ImmersionPair:
    """Two patches on the same chart domain, compared in the g*-orthonormal frame of ``f1``."""

    f1: ImmersionPatch
    f2: ImmersionPatch
    name: str = "pair"

    def __post_init__(self):
        if self.f1.n != self.f2.n:
            raise MetricMismatch(f"dimensions {self.f1.n} and {self.f2.n} differ")

    @property
    def n(self) -> int:
        return self.f1.n

    def points(self, u: Sequence[float]) -> tuple[MoebiusPoint, MoebiusPoint]:
        return MoebiusPoint(self.f1, u), MoebiusPoint(self.f2, u)


def metric_gap(m1: MoebiusPoint, m2: MoebiusPoint) -> float:
    return float(np.linalg.norm(m1.gstar - m2.gstar) / np.linalg.norm(m1.gstar))


# ---------------------------------------------------------------------------
# Theta


@dataclass
class ThetaForm:
    """values[i, j] is the R^{2,2} vector Theta(E_i, E_j) for the frame E of f1."""

    values: np.ndarray
    frame: np.ndarray = field(repr=False, default=None)

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.values - self.values.transpose(1, 0, 2))))

    def perturbed(self, eps: float, rng: np.random.Generator) -> "ThetaForm":
        """Add a random symmetric perturbation of max-norm ``eps`` to the S2 component."""
        n = self.values.shape[0]
        P = rng.standard_normal((n, n))
        P = P + P.T
        P *= eps / np.max(np.abs(P))
        vals = self.values.copy()
        vals[..., 2] += P
        return ThetaForm(vals, self.frame)


def theta_form(pair: ImmersionPair, u: Sequence[float], metric_tol: float = METRIC_TOL) -> ThetaForm:
    m1, m2 = pair.points(u)
    gap = metric_gap(m1, m2)
    if gap > metric_tol:
        raise MetricMismatch(f"Moebius metrics differ by {gap:.3e} at u = {list(map(float, u))}")
    E = m1.frame
    low = lambda T: E.T @ m1.gstar @ T @ E  # bilinear form <T X, Y>* in the frame
    dpsi = m1.blaschke_definition()[0] - m2.blaschke_definition()[0]
    I = np.eye(pair.n)
    vals = np.stack([
        low(m1.S),
        (I + low(dpsi)) / math.sqrt(2.0),
        low(m2.S),
        (I - low(dpsi)) / math.sqrt(2.0),
    ], axis=-1)
    # the frame is g*_1-orthonormal, so <X, Y>* is the identity there
    return ThetaForm(vals, E)


def theta_products(theta: ThetaForm) -> np.ndarray:
    """B[i, j, k, l] = <<Theta(E_i, E_j), Theta(E_k, E_l)>> in R^{2,2}."""
    V = theta.values
    return np.einsum("ija,kla,a->ijkl", V, V, SIG22)


def flatness_and_nullity(theta: ThetaForm) -> tuple[float, float]:
    B = theta_products(theta)
    flat = float(np.max(np.abs(B - B.transpose(0, 3, 2, 1))))
    null = float(np.max(np.abs(B)))
    return flat, null


# ---------------------------------------------------------------------------
# Moebius congruence


def moebius_congruence_residual(pair: ImmersionPair, grid: np.ndarray) -> tuple[float, float]:
    """(metricGap, shapeGap) with one global sign for the shape comparison."""
    mgap = 0.0
    gaps = {1.0: 0.0, -1.0: 0.0}
    for u in np.atleast_2d(grid):
        m1, m2 = pair.points(u)
        mgap = max(mgap, metric_gap(m1, m2))
        S1 = m1.to_frame_op(m1.S)
        S2 = m1.to_frame_op(m2.S)
        for sgn in gaps:
            gaps[sgn] = max(gaps[sgn], float(np.linalg.norm(S1 - sgn * S2)))
    return mgap, min(gaps.values())


def is_moebius_congruent(metricGap: float, shapeGap: float, tol: float = CONGRUENT_TOL) -> bool:
    return metricGap <= tol and shapeGap <= tol


@dataclass
class KernelReport:
    eigenvalue_gap: float  # distance of both S spectra from {+c, -c, 0, ..., 0}
    kernel_angle: float  # largest principal angle between ker S1 and ker S2 (g*_1)
    omega_on_delta: float  # max |omega_i(T)| over g*-unit T in the kernels


def kernel_report(pair: ImmersionPair, grid: np.ndarray) -> KernelReport:
    """Spectral form of the rank-two deformability conclusions, over a grid."""
    n = pair.n
    c = math.sqrt((n - 1) / (2 * n))
    target = np.array([-c] + [0.0] * (n - 2) + [c])
    eg = ang = om = 0.0
    for u in np.atleast_2d(grid):
        kernels = []
        m1, m2 = pair.points(u)
        for m in (m1, m2):
            Sf = m1.to_frame_op(m.S)
            Sf = 0.5 * (Sf + Sf.T)
            vals, vecs = np.linalg.eigh(Sf)
            eg = max(eg, float(np.max(np.abs(vals - target))))
            ker = vecs[:, 1:n - 1]
            kernels.append(ker)
            omega = m.blaschke_definition()[1]
            T = m1.frame @ ker  # chart vectors, g*_1-orthonormal
            om = max(om, float(np.max(np.abs(omega @ T))))
        ang = max(ang, float(np.max(scipy.linalg.subspace_angles(kernels[0], kernels[1]))))
    return KernelReport(eg, ang, om)


# ---------------------------------------------------------------------------
# splitting tensor


@dataclass
class SplittingTensor:
    C: np.ndarray  # 2x2 operator of X -> -(nabla_X T)_{Delta-perp}, basis crossBasis
    Cstar: np.ndarray  # same for the Moebius metric
    T_log_phi: float
    confmetrics_residual: float
    crossBasis: np.ndarray


def _delta_projector(mp: MoebiusPoint, es: EigenStructure, iterations: int = 4) -> Jet:
    """Order-1 jet of the orthogonal projection onto the eigenbundle Delta.

    The multiple eigenvalue is followed as a simple root of
    G(lam) = (n-2) lam^3 + s1^3 - 3 s1 q - p3 with s1 = p1 - (n-2) lam and
    q = (s1^2 - p2 + (n-2) lam^2) / 2, where p_k = tr A^k.
    """
    n = mp.n
    m = n - 2
    A = mp.shape.A.truncate(1)
    A2 = matmul(A, A)
    p1, p2, p3 = A.trace(), A2.trace(), matmul(A2, A).trace()

    def parts(lam):
        s1 = p1 - lam * m
        q = (s1 * s1 - p2 + lam * lam * m) * 0.5
        return s1, q

    lam0 = es.lam
    s1v = float(p1.value) - m * lam0
    qv = 0.5 * (s1v ** 2 - float(p2.value) + m * lam0 ** 2)
    ds1 = -m
    dq = m * (lam0 - s1v)
    dG = 3 * m * lam0 ** 2 + 3 * s1v ** 2 * ds1 - 3 * (ds1 * qv + s1v * dq)
    scale = max(abs(lam0), float(np.max(np.abs(es.distinctVals))), 1e-300)
    if abs(dG) <= 1e-8 * scale ** 2:
        raise EigenvectorFieldNonSmooth("the multiple principal curvature is not a simple root")
    lam = Jet.constant(lam0, n, 1)
    for _ in range(iterations):
        s1, q = parts(lam)
        G = lam * lam * lam * m + s1 * s1 * s1 - s1 * q * 3 - p3
        lam = lam - G / dG
    s1, q = parts(lam)
    denom = lam * lam - s1 * lam + q
    if abs(float(denom.value)) <= 1e-8 * scale ** 2:
        raise EigenvectorFieldNonSmooth("cross principal curvatures approach the multiple one")
    return (A2 - A * s1 + eye(n, n, 1) * q) / denom


class SplittingData:
    """Per-point data for splitting tensors C_T, T in Delta."""

    def __init__(self, patch: ImmersionPatch, u: Sequence[float], tol: float = 1e-6):
        self.mp = MoebiusPoint(patch, u)
        self.es = principal_structure(point_shape(self.mp.shape), tol)
        self.P = _delta_projector(self.mp, self.es)
        self.n = patch.n

    def tensor(self, T0: np.ndarray) -> SplittingTensor:
        mp, n = self.mp, self.n
        T0 = np.asarray(T0, dtype=float)
        Pv = np.asarray(self.P.value)
        perp = np.eye(n) - Pv
        if np.linalg.norm(perp @ T0) > 1e-6 * max(np.linalg.norm(T0), 1e-300):
            raise ValueError("T must lie in the eigenbundle Delta")
        Tj = matmul(self.P, T0)
        dT = np.array([np.asarray(Tj.diff(i).value) for i in range(n)])  # [i, k]
        X = self.es.crossBasis
        g = mp.g

        def op(gamma):
            nab = dT.T + np.einsum("kij,j->ki", gamma, T0)  # [k, i]: nabla_{d_i} T
            img = -perp @ nab @ X
            return X.T @ g @ img

        C = op(np.asarray(mp.gamma.value))
        Cs = op(mp.Gamma)
        dphi = np.asarray(mp.phi_jet.gradient().value)
        t_log_phi = float(dphi @ T0) / mp.phi
        res = float(np.max(np.abs(Cs - (C - t_log_phi * np.eye(2)))))
        return SplittingTensor(C, Cs, t_log_phi, res, X)

    def tensors(self) -> list[SplittingTensor]:
        return [self.tensor(T) for T in self.es.DeltaBasis.T]


def splitting_tensor(patch: ImmersionPatch, u: Sequence[float], T: np.ndarray) -> SplittingTensor:
    return SplittingData(patch, u).tensor(T)


# ---------------------------------------------------------------------------
# classification

ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])


def span_decomposition(C: np.ndarray) -> tuple[float, float, float, float]:
    """C = a I + b J + rest; returns (a, b, |C - a I|, |rest|) in Frobenius norm."""
    a = 0.5 * np.trace(C)
    b = 0.5 * (C[1, 0] - C[0, 1])
    off_I = np.linalg.norm(C - a * np.eye(2))
    rest = np.linalg.norm(C - a * np.eye(2) - b * ROTATION)
    return float(a), float(b), float(off_I), float(rest)


@dataclass
class EllipticStructure:
    kind: str  # "surfaceLike", "elliptic" or "other"
    j_sign: int  # sign s of J = s * rotation making (A - lam I) J symmetric
    j_component: float  # max |b| over samples
    span_I_residual: float
    span_IJ_residual: float
    symmetry_residual: float  # max |(A - lam I) J - ((A - lam I) J)^T|
    j_square_residual: float
    confmetrics_residual: float


def elliptic_structure(patch: ImmersionPatch, grid: np.ndarray, tol: float = SPAN_TOL) -> EllipticStructure:
    span_I = span_IJ = jmax = sym = conf = 0.0
    jsq = 0.0
    signs = {1: 0.0, -1: 0.0}
    for u in np.atleast_2d(grid):
        sd = SplittingData(patch, u)
        D = np.diag(sd.es.distinctVals - sd.es.lam)  # A - lam I on Delta-perp, crossBasis
        for s in signs:
            M = D @ (s * ROTATION)
            signs[s] = max(signs[s], float(np.max(np.abs(M - M.T))))
        jsq = max(jsq, float(np.max(np.abs(ROTATION @ ROTATION + np.eye(2)))))
        scale = max(1.0, float(np.max(np.abs(D))))
        for st in sd.tensors():
            _, b, r_i, r_ij = span_decomposition(st.C)
            span_I = max(span_I, r_i / scale)
            span_IJ = max(span_IJ, r_ij / scale)
            jmax = max(jmax, abs(b))
            conf = max(conf, st.confmetrics_residual)
    j_sign = 1 if signs[1] <= signs[-1] else -1
    sym = signs[j_sign]
    if span_I <= tol:
        kind = "surfaceLike"
    elif span_IJ <= tol and jmax >= J_COMPONENT_MIN and sym <= tol:
        kind = "elliptic"
    else:
        kind = "other"
    return EllipticStructure(kind, j_sign, jmax, span_I, span_IJ, sym, jsq, conf)


# ---------------------------------------------------------------------------
# associated family


def _oriented_cross_basis(X: np.ndarray, coords: tuple[int, int]) -> np.ndarray:
    i, j = coords
    if np.linalg.det(X[[i, j], :]) < 0:
        X = X[:, ::-1]
    return X


def j_theta(theta: float, X: np.ndarray, g: np.ndarray, P_delta: np.ndarray) -> np.ndarray:
    """cos(theta) I + sin(theta) J on Delta-perp and I on Delta, as a chart operator.

    ``X`` holds a g-orthonormal basis of Delta-perp with J X_1 = X_2.
    """
    x1, x2 = X[:, 0], X[:, 1]
    J = (np.outer(x2, x1) - np.outer(x1, x2)) @ g
    perp = np.eye(len(g)) - P_delta
    return P_delta + math.cos(theta) * perp + math.sin(theta) * J


def finalkey_residual(pair: ImmersionPair, theta: float, grid: np.ndarray,
                      conformal_tol: float = METRIC_TOL, tol: float = 1e-6) -> float:
    """min over the orientation of J and the sign of max_u |(A - lam I) J_theta -+ phi (A_t - H_t I)|.

    The norm is the Frobenius norm in a g-orthonormal frame; phi is the
    conformal factor between the induced metrics of the pair.
    """
    grid = np.atleast_2d(grid)
    n = pair.n
    coords = None
    worst = {(o, s): 0.0 for o in (1, -1) for s in (1, -1)}
    for u in grid:
        s1 = point_shape(shape_jets(pair.f1, u))
        s2 = point_shape(shape_jets(pair.f2, u))
        ratio = np.linalg.solve(s1.g, s2.g)
        c = float(np.trace(ratio)) / n
        if np.max(np.abs(s2.g - c * s1.g)) > conformal_tol * np.max(np.abs(s1.g)):
            raise MetricNotConformal(f"induced metrics are not proportional at u = {u.tolist()}")
        phi = math.sqrt(c)
        es = principal_structure(s1, tol)
        X = es.crossBasis
        if coords is None:
            pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
            coords = max(pairs, key=lambda ij: abs(np.linalg.det(X[list(ij), :])))
        X = _oriented_cross_basis(X, coords)
        P = es.DeltaBasis @ es.DeltaBasis.T @ s1.g
        L = np.linalg.cholesky(s1.g)  # frame change to g-orthonormal components
        lhs_base = s1.A - es.lam * np.eye(n)
        rhs = phi * (s2.A - s2.H * np.eye(n))
        for o in (1, -1):
            Jt = j_theta(theta, X if o == 1 else X[:, ::-1], s1.g, P)
            lhs = lhs_base @ Jt
            for s in (1, -1):
                diff = L.T @ (lhs - s * rhs) @ np.linalg.inv(L.T)
                worst[(o, s)] = max(worst[(o, s)], float(np.linalg.norm(diff)))
    return min(worst.values())
