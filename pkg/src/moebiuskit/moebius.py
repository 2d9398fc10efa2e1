"""Moebius invariants of a hypersurface and the conformal Gauss/Codazzi residuals.

Conventions
-----------
* ``phi**2 = n/(n-1) * (|alpha|^2 - n H^2)``, ``g* = phi**2 g``, ``S = (A - H I)/phi``.
* Christoffel arrays are indexed ``gamma[k, i, j]`` for Gamma^k_ij.
* Curvature arrays are indexed ``R[l, i, j, k]`` with R(d_i, d_j) d_k = R^l_ijk d_l
  and R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
* Wedge: (A ^ B) Z = <B, Z> A - <A, Z> B.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UmbilicPoint
from .hypersurface import ImmersionPatch, ShapeJets, shape_jets
from .jets import Jet, contract, eye, inv, sqrt

UMBILIC_RATIO = 1e-12


@dataclass
class MoebiusData:
    phi: float
    gStar: np.ndarray
    S: np.ndarray
    psi: np.ndarray | None = None
    omega: np.ndarray | None = None
    sStar: float | None = None


def christoffel(G: Jet) -> Jet:
    """Christoffel symbols of a metric jet, one order lower."""
    dG = Jet.stack([G.diff(l) for l in range(G.dim)])  # [l, i, j]
    D = dG.coeffs
    T = D + D.transpose(1, 0, 2, 3) - D.transpose(1, 2, 0, 3)  # [i, j, l]
    T = Jet(dG.dim, dG.order, T)
    return contract("kl,ijl->kij", inv(G.truncate(dG.order)), T) * 0.5


def riemann_at_center(gamma: Jet) -> np.ndarray:
    """R[l, i, j, k] at the center from an order >= 1 Christoffel jet."""
    G = np.asarray(gamma.value)
    dG = np.array([np.asarray(gamma.diff(i).value) for i in range(gamma.dim)])  # [i, l, j, k]
    R = dG.transpose(1, 0, 2, 3) - dG.transpose(1, 2, 0, 3)
    R = R + np.einsum("lim,mjk->lijk", G, G) - np.einsum("ljm,mik->lijk", G, G)
    return R


def orthonormal_frame(G: np.ndarray) -> np.ndarray:
    """Columns form a G-orthonormal basis (Cholesky gauge)."""
    L = np.linalg.cholesky(0.5 * (G + G.T))
    return np.linalg.inv(L).T


class MoebiusPoint:
    """All Moebius-geometric quantities of a patch at one chart point.

    Built once per point; the public functions below are thin views of it.
    """

    def __init__(self, patch: ImmersionPatch, u: Sequence[float], umbilic_ratio: float = UMBILIC_RATIO):
        sj = shape_jets(patch, u)
        n = patch.n
        self.n = n
        self.patch = patch
        self.shape: ShapeJets = sj
        phi_sq = (sj.alpha_sq - sj.H * sj.H * n) * (n / (n - 1))
        p2 = float(phi_sq.value)
        self.phi_sq_value = p2
        if p2 <= umbilic_ratio * max(float(sj.alpha_sq.value), 1.0):
            raise UmbilicPoint(f"{patch.name}: phi^2 = {p2:.3e} at u = {list(map(float, u))}")
        self.phi_jet = sqrt(phi_sq)
        g2 = sj.g.truncate(2)
        self.gstar_jet = g2 * phi_sq
        self.S_jet = (sj.A - eye(n, n, 2) * sj.H) / self.phi_jet
        self.gamma_star = christoffel(self.gstar_jet)  # order 1
        self.gamma = christoffel(sj.g.truncate(2))  # order 1, induced metric

        self.phi = float(self.phi_jet.value)
        self.H = float(sj.H.value)
        self.g = np.asarray(sj.g.value)
        self.A = np.asarray(sj.A.value)
        self.gstar = np.asarray(self.gstar_jet.value)
        self.S = np.asarray(self.S_jet.value)
        self.frame = orthonormal_frame(self.gstar)
        self.frame_inv = np.linalg.inv(self.frame)
        self._R = None
        self._psi = None
        self._omega = None

    # -- connection and curvature -------------------------------------------
    @property
    def Gamma(self) -> np.ndarray:
        return np.asarray(self.gamma_star.value)

    @property
    def R(self) -> np.ndarray:
        if self._R is None:
            self._R = riemann_at_center(self.gamma_star)
        return self._R

    def to_frame_op(self, T: np.ndarray) -> np.ndarray:
        return self.frame_inv @ T @ self.frame

    # -- Blaschke tensor and Moebius form -------------------------------------
    def blaschke_definition(self) -> tuple[np.ndarray, np.ndarray]:
        if self._psi is None:
            phi = self.phi
            dphi = np.asarray(self.phi_jet.gradient().value)
            ddphi = np.array([[float(self.phi_jet.diff(i).diff(j).value) for j in range(self.n)]
                              for i in range(self.n)])
            hess = ddphi - np.einsum("kij,k->ij", self.Gamma, dphi)
            gs_inv = np.linalg.inv(self.gstar)
            grad_sq = float(dphi @ gs_inv @ dphi)
            low = (self.H / phi) * (self.gstar @ self.S) \
                + (grad_sq + self.H ** 2) / (2 * phi ** 2) * self.gstar - hess / phi
            self._psi = gs_inv @ (0.5 * (low + low.T))
            dH = np.asarray(self.shape.H.gradient().value)
            self._omega = -(dH + self.S.T @ dphi) / phi
        return self._psi, self._omega

    def ricci(self) -> np.ndarray:
        return np.einsum("iijk->jk", self.R)

    def blaschke_curvature(self) -> tuple[np.ndarray, float]:
        n = self.n
        ric_op = np.linalg.inv(self.gstar) @ self.ricci()
        scal = float(np.trace(ric_op))
        S2 = self.S @ self.S
        trace_psi = (scal + float(np.trace(S2))) / (2 * n - 2)
        psi = (ric_op + S2 - trace_psi * np.eye(n)) / (n - 2)
        s_star = (2 * n * trace_psi - 1) / n ** 2
        return psi, s_star

    # -- structure equations ---------------------------------------------------
    def gauss_terms(self) -> tuple[np.ndarray, np.ndarray]:
        """Frame components of R* and of the right-hand side, both [l, i, j, k]."""
        E, Ei = self.frame, self.frame_inv
        R = np.einsum("la,aijk,ib,jc,kd->lbcd", Ei, self.R, E, E, E)
        S = self.to_frame_op(self.S)
        psi = self.to_frame_op(self.blaschke_definition()[0])
        d = np.eye(self.n)
        rhs = np.einsum("li,kj->lijk", S, S) - np.einsum("lj,ki->lijk", S, S)
        rhs += np.einsum("li,jk->lijk", psi, d) - np.einsum("ki,lj->lijk", psi, d)
        rhs += np.einsum("li,kj->lijk", d, psi) - np.einsum("ik,lj->lijk", d, psi)
        return R, rhs

    def gauss_residual(self) -> float:
        R, rhs = self.gauss_terms()
        diff = np.linalg.norm(R - rhs, axis=0)
        scale = max(float(np.sum(self.S * self.S.T)), float(np.max(np.linalg.norm(R, axis=0))))
        return float(np.max(diff)) / scale

    def codazzi_terms(self) -> tuple[np.ndarray, np.ndarray]:
        """Frame components [l, a, b] of (nabla_a S) e_b - (nabla_b S) e_a and of the omega side."""
        n = self.n
        S1 = self.S_jet.truncate(1)
        dS = np.array([np.asarray(S1.diff(i).value) for i in range(n)])  # [i, k, j]
        G = self.Gamma
        nabla = dS + np.einsum("kim,mj->ikj", G, self.S) - np.einsum("km,mij->ikj", self.S, G)
        lhs = nabla.transpose(1, 0, 2) - nabla.transpose(1, 2, 0)  # [k, i, j]
        _, omega = self.blaschke_definition()
        d = np.eye(n)
        rhs = np.einsum("i,kj->kij", omega, d) - np.einsum("j,ki->kij", omega, d)
        E, Ei = self.frame, self.frame_inv
        to_frame = lambda T: np.einsum("lk,kij,ia,jb->lab", Ei, T, E, E)
        return to_frame(lhs), to_frame(rhs)

    def codazzi_residual(self) -> float:
        lhs, rhs = self.codazzi_terms()
        diff = np.linalg.norm(lhs - rhs, axis=0)
        scale = max(float(np.sum(self.S * self.S.T)), float(np.max(np.linalg.norm(lhs, axis=0))))
        return float(np.max(diff)) / scale

    # -- norms -------------------------------------------------------------------
    def star_norm_sq(self, T: np.ndarray) -> float:
        """|T|*^2 of an endomorphism, i.e. the Frobenius norm in a g*-orthonormal frame."""
        Tf = self.to_frame_op(T)
        return float(np.sum(Tf * Tf))

    def data(self) -> MoebiusData:
        psi, omega = self.blaschke_definition()
        _, s_star = self.blaschke_curvature()
        return MoebiusData(self.phi, self.gstar, self.S, psi, omega, s_star)


# ---------------------------------------------------------------------------
# functional entry points


def moebius_data(patch: ImmersionPatch, u: Sequence[float]) -> MoebiusData:
    """phi, g* and S at ``u`` (psi, omega, s* left empty)."""
    mp = MoebiusPoint(patch, u)
    return MoebiusData(mp.phi, mp.gstar, mp.S)


def moebius_invariants(patch: ImmersionPatch, u: Sequence[float]) -> MoebiusData:
    """Every Moebius invariant at ``u``, with psi from its definition."""
    return MoebiusPoint(patch, u).data()


def star_connection(patch: ImmersionPatch, u: Sequence[float]) -> np.ndarray:
    return MoebiusPoint(patch, u).Gamma


def blaschke_form(patch: ImmersionPatch, u: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    return MoebiusPoint(patch, u).blaschke_definition()


def blaschke_via_curvature(patch: ImmersionPatch, u: Sequence[float]) -> tuple[np.ndarray, float]:
    return MoebiusPoint(patch, u).blaschke_curvature()


def conformal_gauss_residual(patch: ImmersionPatch, u: Sequence[float]) -> float:
    return MoebiusPoint(patch, u).gauss_residual()


def conformal_codazzi_residual(patch: ImmersionPatch, u: Sequence[float]) -> float:
    return MoebiusPoint(patch, u).codazzi_residual()
