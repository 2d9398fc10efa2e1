"""Hypersurface charts, their fundamental forms, and ambient Moebius maps."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    AmbiguousClustering,
    DimMismatch,
    InversionCenterOnImage,
    JacobianRankDeficient,
    NoMultiplicityN2,
)
from .jets import Jet, inv, jet_array, matmul, sqrt

FULL_ORDER = 4
RANK_TOL = 1e-10


@dataclass(frozen=True)
class ImmersionPatch:
    """A chart f: U in R^n -> R^{n+1} evaluated through order-4 jets.

    ``evaluator`` receives the list of chart-variable jets and returns the
    n+1 ambient coordinates (jets or nested lists of jets).  ``orientation``
    multiplies the normal fixed by ``det[df_1, ..., df_n, N] > 0``.
    """

    n: int
    domain: tuple
    evaluator: Callable
    orientation: int = 1
    name: str = "patch"
    check_point: Callable | None = field(default=None, compare=False)

    def jet(self, u: Sequence[float], order: int = FULL_ORDER) -> Jet:
        u = [float(x) for x in u]
        if len(u) != self.n:
            raise DimMismatch(f"{self.name}: expected {self.n} chart coordinates, got {len(u)}")
        variables = Jet.variables(u, order)
        out = jet_array(self.evaluator(variables), self.n, order)
        if out.shape != (self.n + 1,):
            raise DimMismatch(f"{self.name}: evaluator returned shape {out.shape}")
        if self.check_point is not None:
            self.check_point(out)
        return out

    def point(self, u: Sequence[float]) -> np.ndarray:
        return np.asarray(self.jet(u, order=0).value)

    def in_domain(self, u: Sequence[float]) -> bool:
        return all(lo < x < hi for x, (lo, hi) in zip(u, self.domain))

    def flipped(self) -> "ImmersionPatch":
        return replace(self, orientation=-self.orientation)


@dataclass
class ShapeJets:
    """Jets of the first and second fundamental data at one chart point.

    Orders: ``F`` 4, ``dF`` and ``g`` 3, everything normal-dependent 2.
    """

    u: np.ndarray
    F: Jet
    dF: Jet  # (n, n+1): row i is d_i f
    g: Jet
    N: Jet
    b: Jet  # second fundamental form <d_i d_j f, N>
    A: Jet
    H: Jet
    alpha_sq: Jet


@dataclass
class PointShape:
    u: np.ndarray
    g: np.ndarray
    N: np.ndarray
    A: np.ndarray
    H: float
    alphaNormSq: float
    principal_values: np.ndarray
    principal_vectors: np.ndarray  # g-orthonormal columns
    b: np.ndarray = None


@dataclass
class EigenStructure:
    lam: float
    DeltaBasis: np.ndarray  # n x (n-2), g-orthonormal columns
    crossBasis: np.ndarray  # n x 2
    distinctVals: np.ndarray
    tol: float = 1e-6


def normal_at(dF0: np.ndarray, orientation: int) -> np.ndarray:
    """Unit normal of the tangent rows ``dF0`` with the det-sign convention."""
    _, svals, vt = np.linalg.svd(dF0)
    if svals[-1] <= RANK_TOL * svals[0]:
        raise JacobianRankDeficient(f"df has singular values {svals}")
    e = vt[-1]
    sign = np.sign(np.linalg.det(np.vstack([dF0, e])))
    return e * sign * orientation


def shape_jets(patch: ImmersionPatch, u: Sequence[float]) -> ShapeJets:
    F = patch.jet(u, FULL_ORDER)
    n = patch.n
    dF = Jet.stack([F.diff(i) for i in range(n)])
    g = matmul(dF, dF.T)
    e = normal_at(np.asarray(dF.value), patch.orientation)

    dF2 = dF.truncate(2)
    g2 = g.truncate(2)
    # project the frozen normal off the moving tangent space, then normalize
    tang = matmul(dF2, e)
    Nraw = e - matmul(matmul(inv(g2), tang), dF2)
    N = Nraw / sqrt((Nraw * Nraw).sum())

    ddF = Jet.stack([Jet.stack([dF[i].diff(j) for j in range(n)]) for i in range(n)])
    b = (ddF * N).sum(axis=-1)
    A = matmul(inv(g2), b)
    H = A.trace() / n
    alpha_sq = matmul(A, A).trace()
    return ShapeJets(np.asarray(u, dtype=float), F, dF, g, N, b, A, H, alpha_sq)


def point_shape(sj: ShapeJets) -> PointShape:
    g = np.asarray(sj.g.value)
    b = np.asarray(sj.b.value)
    b = 0.5 * (b + b.T)
    vals, vecs = scipy.linalg.eigh(b, g)
    order = np.argsort(vals)[::-1]
    return PointShape(
        u=sj.u,
        g=g,
        N=np.asarray(sj.N.value),
        A=np.asarray(sj.A.value),
        H=float(sj.H.value),
        alphaNormSq=float(sj.alpha_sq.value),
        principal_values=vals[order],
        principal_vectors=vecs[:, order],
        b=b,
    )


def shape_data(patch: ImmersionPatch, u: Sequence[float]) -> PointShape:
    """First and second fundamental data of ``patch`` at ``u``."""
    return point_shape(shape_jets(patch, u))


def cluster_eigenvalues(vals: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage clusters of sorted eigenvalue indices, gap relative to max |k|."""
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    order = np.argsort(vals)
    clusters = [[order[0]]]
    for a, b in zip(order[:-1], order[1:]):
        if vals[b] - vals[a] <= tol * scale:
            clusters[-1].append(b)
        else:
            clusters.append([b])
    return clusters


def principal_structure(shape: PointShape, tol: float = 1e-6) -> EigenStructure:
    """Find the principal curvature of multiplicity n-2 and split T_xM."""
    vals = shape.principal_values
    vecs = shape.principal_vectors
    n = len(vals)
    clusters = cluster_eigenvalues(vals, tol)
    big = [c for c in clusters if len(c) == n - 2]
    if not big:
        sizes = sorted(len(c) for c in clusters)
        raise NoMultiplicityN2(f"eigenvalue multiplicities {sizes}, none equal to {n - 2}")
    if len(big) > 1:
        raise AmbiguousClustering(f"{len(big)} clusters of size {n - 2}")
    idx = sorted(big[0])
    rest = [i for i in range(n) if i not in idx]
    lam = float(np.mean(vals[idx]))
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    if np.any(np.abs(vals[rest] - lam) < 10 * tol * scale):
        raise NoMultiplicityN2("cross eigenvalues too close to the multiple one")
    rest = sorted(rest, key=lambda i: -vals[i])
    return EigenStructure(lam, vecs[:, idx], vecs[:, rest], vals[rest], tol)


# ---------------------------------------------------------------------------
# Moebius transformations of R^{n+1}


@dataclass(frozen=True)
class MoebiusTransform:
    """x -> scale * Q @ inv_c(x) + shift, where inv_c is an optional inversion."""

    scale: float = 1.0
    rotation: np.ndarray | None = None
    shift: np.ndarray | None = None
    inversion_center: np.ndarray | None = None

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, *, inversion: bool = True,
               center_scale: float = 10.0) -> "MoebiusTransform":
        q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
        q = q * np.sign(np.diag(r))
        center = None
        if inversion:
            d = rng.standard_normal(dim)
            center = center_scale * d / np.linalg.norm(d)
        return cls(
            scale=float(rng.uniform(0.5, 2.0)),
            rotation=q,
            shift=rng.uniform(-1.0, 1.0, dim),
            inversion_center=center,
        )

    def to_dict(self) -> dict:
        out = {"scale": self.scale}
        if self.rotation is not None:
            out["rotation"] = np.asarray(self.rotation).tolist()
        if self.shift is not None:
            out["shift"] = np.asarray(self.shift).tolist()
        if self.inversion_center is not None:
            out["inversion_center"] = np.asarray(self.inversion_center).tolist()
        return out

    def __call__(self, x):
        if self.inversion_center is not None:
            d = x - self.inversion_center
            sq = (d * d).sum(axis=-1) if isinstance(d, Jet) else float(np.dot(d, d))
            x = d / sq
        if self.rotation is not None:
            x = matmul(self.rotation, x) if isinstance(x, Jet) else self.rotation @ x
        x = x * self.scale
        if self.shift is not None:
            x = x + self.shift
        return x


def apply_moebius(patch: ImmersionPatch, T: MoebiusTransform, samples=None,
                  eps: float = 1e-6) -> ImmersionPatch:
    """The patch T o f, with an exact jet composition."""
    if T.scale <= 0:
        raise ValueError("scale must be positive")
    c = T.inversion_center

    def too_close(F: Jet):
        if c is not None and np.linalg.norm(np.asarray(F.value) - c) <= eps:
            raise InversionCenterOnImage(f"inversion center {np.asarray(c).tolist()} lies on the image")

    def evaluator(u):
        F = jet_array(patch.evaluator(u), patch.n, u[0].order)
        too_close(F)
        return T(F)

    if samples is not None:
        for u in samples:
            too_close(patch.jet(u, order=0))

    return replace(patch, evaluator=evaluator, name=f"T({patch.name})", check_point=None)


def tensor_grid(window: Sequence[tuple[float, float]], counts) -> np.ndarray:
    """Uniform tensor grid over ``window``; rows are chart points in C order.

    ``counts`` is one integer per variable or a single integer for all.  A count
    of 1 samples the midpoint of that interval.
    """
    if np.isscalar(counts):
        counts = [int(counts)] * len(window)
    if len(counts) != len(window):
        raise DimMismatch(f"{len(counts)} grid counts for {len(window)} variables")
    axes = []
    for (lo, hi), k in zip(window, counts):
        if k < 1:
            raise ValueError("grid counts must be positive")
        axes.append(np.array([0.5 * (lo + hi)]) if k == 1 else np.linspace(lo, hi, k))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)
