"""Lorentz space L^{n+3}, the light-cone model of R^{n+1}, and R^{2,2}.

Vectors of L^{n+3} are plain arrays (or vector Jets) whose component 0 is the
time-like direction, so that ``<u, v> = -u0 v0 + sum_{i>=1} ui vi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartInvalid, DimMismatch
from .jets import Jet, matmul

SIG22 = np.array([1.0, 1.0, -1.0, -1.0])


def minkowski_signature(dim: int) -> np.ndarray:
    eta = np.ones(dim)
    eta[0] = -1.0
    return eta


def mink_inner(u, v):
    """Lorentzian inner product over the last axis (arrays or Jets)."""
    du = u.shape[-1]
    dv = v.shape[-1]
    if du != dv:
        raise DimMismatch(f"vectors of dimension {du} and {dv}")
    eta = minkowski_signature(du)
    if isinstance(u, Jet) or isinstance(v, Jet):
        return (u * v * eta).sum(axis=-1)
    return np.sum(np.asarray(u) * np.asarray(v) * eta, axis=-1)


def mink_gram(vectors) -> np.ndarray:
    """Lorentzian Gram matrix of the rows of ``vectors``."""
    vectors = np.atleast_2d(vectors)
    eta = minkowski_signature(vectors.shape[-1])
    return (vectors * eta) @ vectors.T


def sig22_inner(a, b):
    """Signature (2,2) product a1b1 + a2b2 - a3b3 - a4b4 over the last axis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != 4 or b.shape[-1] != 4:
        raise DimMismatch("R^{2,2} vectors have 4 components")
    return np.sum(a * b * SIG22, axis=-1)


@dataclass(frozen=True)
class LightConeChart:
    """Data (v, w, C) of the isometric embedding of R^{n+1} into the light cone."""

    n: int
    v: np.ndarray
    w: np.ndarray
    C: np.ndarray

    @classmethod
    def default(cls, n: int) -> "LightConeChart":
        dim = n + 3
        w = np.zeros(dim)
        w[0] = w[-1] = 1.0
        v = np.zeros(dim)
        v[0] = -0.5
        v[-1] = 0.5
        C = np.zeros((dim, n + 1))
        C[1:n + 2, :] = np.eye(n + 1)
        return cls(n, v, w, C)

    def violations(self) -> dict:
        vw = self.w
        cols = self.C.T
        gram = mink_gram(cols) if len(cols) else np.zeros((0, 0))
        return {
            "w.w": abs(mink_inner(vw, vw)),
            "v.v": abs(mink_inner(self.v, self.v)),
            "v.w-1": abs(mink_inner(self.v, vw) - 1.0),
            "C orthonormal": float(np.max(np.abs(gram - np.eye(self.n + 1)))),
            "C.v": float(np.max(np.abs(mink_inner(cols, self.v)))),
            "C.w": float(np.max(np.abs(mink_inner(cols, vw)))),
        }

    def validate(self, tol: float = 1e-12) -> "LightConeChart":
        dim = self.n + 3
        if self.v.shape != (dim,) or self.w.shape != (dim,) or self.C.shape != (dim, self.n + 1):
            raise ChartInvalid("chart arrays have the wrong shapes")
        bad = {k: val for k, val in self.violations().items() if val > tol}
        if bad:
            raise ChartInvalid(f"light-cone chart invariants violated: {bad}")
        return self


def _sq_norm(x):
    if isinstance(x, Jet):
        return (x * x).sum(axis=-1)
    return float(np.dot(x, x))


def lightcone_embed(chart: LightConeChart, x):
    """Psi(x) = v + C x - |x|^2 w / 2; accepts an array or a vector Jet."""
    if x.shape[-1] != chart.n + 1:
        raise DimMismatch(f"expected a point of R^{chart.n + 1}")
    if isinstance(x, Jet):
        return matmul(chart.C, x) + chart.v - Jet.stack([_sq_norm(x) * (0.5 * wi) for wi in chart.w])
    x = np.asarray(x, dtype=float)
    return chart.v + chart.C @ x - 0.5 * _sq_norm(x) * chart.w


def lightcone_differential(chart: LightConeChart, x, X):
    """dPsi_x(X) = C X - <x, X> w."""
    if x.shape[-1] != chart.n + 1 or X.shape[-1] != chart.n + 1:
        raise DimMismatch(f"expected vectors of R^{chart.n + 1}")
    if isinstance(x, Jet) or isinstance(X, Jet):
        xx = (x * X).sum(axis=-1)
        return matmul(chart.C, X) - Jet.stack([xx * wi for wi in chart.w])
    x = np.asarray(x, dtype=float)
    X = np.asarray(X, dtype=float)
    return chart.C @ X - float(np.dot(x, X)) * chart.w


def lorentz_project_out(vec: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Remove from ``vec`` its component in span(basis), orthogonally in L^{n+3}.

    The span must be a non-degenerate subspace.
    """
    basis = np.atleast_2d(basis)
    G = mink_gram(basis)
    rhs = mink_inner(basis, vec)
    coef = np.linalg.solve(G, rhs)
    return vec - coef @ basis
