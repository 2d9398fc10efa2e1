"""Closed-form example hypersurfaces.

All evaluators are written with the jet elementary functions so that the same
code yields points and exact Taylor expansions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import jets as J
from .errors import ChartSingularity, FrameDegenerate, InvalidSpec
from .hypersurface import ImmersionPatch, normal_at, shape_jets
from .jets import Jet, jet_array

EXAMPLE_IDS = ("round_cylinder", "unit_sphere", "minimal_cylinder", "cone_cylinder", "cartan_example")

# Minimal member of Cartan's isoparametric family: 3 cot(3 t0) = 0.
TUBE_RADIUS = math.pi / 6
SQ3 = math.sqrt(3.0)
FRAME_MIN_NORM = 1e-3


@dataclass(frozen=True)
class ExampleSpec:
    id: str
    n: int = 5
    params: dict = field(default_factory=dict)

    def validate(self) -> "ExampleSpec":
        if self.id not in EXAMPLE_IDS:
            raise InvalidSpec(f"unknown example id {self.id!r}")
        info = CATALOG[self.id]
        if self.n < info["min_n"] or self.n > 6:
            raise InvalidSpec(f"{self.id}: n must be in {info['min_n']}..6, got {self.n}")
        unknown = set(self.params) - set(info["params"])
        if unknown:
            raise InvalidSpec(f"{self.id}: unknown parameters {sorted(unknown)}")
        if "theta" in self.params:
            th = float(self.params["theta"])
            if not 0.0 <= th < 2 * math.pi:
                raise InvalidSpec(f"theta must lie in [0, 2pi), got {th}")
        return self


# ---------------------------------------------------------------------------
# catalog (also serialized by the CLI)

CATALOG = {
    "round_cylinder": {
        "description": "circular cylinder S^1 x R^{n-1}, normal toward the axis",
        "min_n": 2,
        "params": {},
        "variables": ["u1", "u2..un"],
        "domain": lambda n: [(-math.pi, math.pi)] + [(-100.0, 100.0)] * (n - 1),
        "window": lambda n: [(-0.5, 0.5)] + [(-1.0, 1.0)] * (n - 1),
    },
    "unit_sphere": {
        "description": "unit sphere in hyperspherical coordinates, inward normal (umbilic everywhere)",
        "min_n": 2,
        "params": {},
        "variables": ["theta_1..theta_{n-1}", "phi"],
        "domain": lambda n: [(0.0, math.pi)] * (n - 1) + [(-math.pi, math.pi)],
        "window": lambda n: [(0.6, 2.4)] * (n - 1) + [(-1.0, 1.0)],
    },
    "minimal_cylinder": {
        "description": "associated-family member cos(theta) catenoid + sin(theta) helicoid, times R^{n-2}",
        "min_n": 3,
        "params": {"theta": "angle in [0, 2pi), default 0 (catenoid)"},
        "variables": ["v", "w", "y1..y_{n-2}"],
        "domain": lambda n: [(-300.0, 300.0), (-100.0, 100.0)] + [(-100.0, 100.0)] * (n - 2),
        "window": lambda n: [(-0.8, 0.8), (-1.0, 1.0)] + [(-1.0, 1.0)] * (n - 2),
    },
    "cone_cylinder": {
        "description": "cone over the Clifford torus of S^3, times R^{n-3}",
        "min_n": 3,
        "params": {},
        "variables": ["r", "alpha", "beta", "y1..y_{n-3}"],
        "domain": lambda n: [(0.0, 100.0), (-math.pi, math.pi), (-math.pi, math.pi)] + [(-100.0, 100.0)] * (n - 3),
        "window": lambda n: [(0.5, 2.0), (-1.0, 1.0), (-1.0, 1.0)] + [(-1.0, 1.0)] * (n - 3),
    },
    "cartan_example": {
        "description": "Phi o (id x Cartan minimal isoparametric tube) on H^{n-3}_{-m} x N^3, m = sqrt((n-1)/n)",
        "min_n": 5,
        "params": {},
        "variables": ["t", "a1..a_{n-4}", "p1 (latitude)", "p2 (longitude)", "s"],
        "domain": lambda n: [(0.0, 100.0)] + [(-100.0, 100.0)] * (n - 4)
        + [(-math.pi / 2, math.pi / 2), (-math.pi, math.pi), (-math.pi, math.pi)],
        "window": lambda n: [(0.8, 1.5)] + [(-0.5, 0.5)] * (n - 4) + [(-0.4, 0.4), (0.3, 1.1), (0.2, 1.0)],
    },
}


def catalog_entry(example_id: str, n: int = 5) -> dict:
    info = CATALOG[example_id]
    return {
        "id": example_id,
        "description": info["description"],
        "params": dict(info["params"]),
        "n": {"default": 5, "min": info["min_n"], "max": 6},
        "variables": list(info["variables"]),
        "domain": [list(w) for w in info["domain"](n)],
        "default_window": [list(w) for w in info["window"](n)],
    }


def default_window(spec: ExampleSpec) -> list:
    return [tuple(w) for w in CATALOG[spec.id]["window"](spec.n)]


# ---------------------------------------------------------------------------
# Veronese surface and Cartan's tube


def veronese_map(xyz):
    """Classical Veronese quadratic map R^3 -> R^5 (unit sphere to unit sphere)."""
    x, y, z = xyz
    return [SQ3 * y * z, SQ3 * z * x, SQ3 * x * y, 0.5 * SQ3 * (x * x - y * y), 0.5 * (x * x + y * y - 2 * z * z)]


def _veronese_differential(xyz, h):
    x, y, z = xyz
    hx, hy, hz = h
    return [
        SQ3 * (hy * z + y * hz),
        SQ3 * (hz * x + z * hx),
        SQ3 * (hx * y + x * hy),
        SQ3 * (x * hx - y * hy),
        x * hx + y * hy - 2 * z * hz,
    ]


def sphere_chart(p1, p2):
    """Latitude/longitude chart of S^2 and its two coordinate partials."""
    c1, s1, c2, s2 = J.cos(p1), J.sin(p1), J.cos(p2), J.sin(p2)
    xyz = [c1 * c2, c1 * s2, s1]
    d1 = [-s1 * c2, -s1 * s2, c1]
    d2 = [-c1 * s2, c1 * c2, 0.0 * c1]
    return xyz, d1, d2


def _as_vec(items):
    if any(isinstance(x, Jet) for x in items):
        ref = next(x for x in items if isinstance(x, Jet))
        return jet_array(list(items), ref.dim, ref.order)
    return np.array(items, dtype=float)


def _dot(a, b):
    return (a * b).sum(axis=-1) if isinstance(a, Jet) or isinstance(b, Jet) else float(np.dot(a, b))


def _gram_schmidt(vectors, min_norm=FRAME_MIN_NORM):
    out = []
    for v in vectors:
        for q in out:
            v = v - q * _dot(q, v)
        nrm2 = _dot(v, v)
        nv = math.sqrt(float(nrm2.value if isinstance(nrm2, Jet) else nrm2))
        if nv < min_norm:
            raise FrameDegenerate(f"Gram-Schmidt residual norm {nv:.3g} below {min_norm}")
        out.append(v / J.sqrt(nrm2))
    return out


def choose_frame_seeds(p_center) -> tuple[int, int]:
    """Pair of standard basis vectors of R^5 that best completes (V, dV1, dV2).

    Pairs are scanned in lexicographic order; the first best-conditioned pair wins.
    """
    xyz, d1, d2 = sphere_chart(*p_center)
    dV1 = _as_vec(_veronese_differential(xyz, d1))
    dV2 = _as_vec(_veronese_differential(xyz, d2))
    base = [_as_vec(veronese_map(xyz)), dV1 / np.linalg.norm(dV1), dV2 / np.linalg.norm(dV2)]
    eye = np.eye(5)
    scores = {(i, j): abs(np.linalg.det(np.array(base + [eye[i], eye[j]])))
              for i, j in combinations(range(5), 2)}
    best = max(scores, key=lambda k: (scores[k], -k[0], -k[1]))
    if scores[best] < FRAME_MIN_NORM:
        raise FrameDegenerate("no usable seed pair")
    return best


def veronese(p, seeds=None):
    """Veronese point V(p) on S^4 with an orthonormal normal frame (xi1, xi2) in T S^4.

    ``p`` is a (latitude, longitude) chart point; scalars or jets.
    """
    p1, p2 = p
    if seeds is None:
        pv = [float(x.value) if isinstance(x, Jet) else float(x) for x in p]
        seeds = choose_frame_seeds(pv)
    xyz, d1, d2 = sphere_chart(p1, p2)
    if abs(float(J.cos(p1).value if isinstance(p1, Jet) else math.cos(p1))) < FRAME_MIN_NORM:
        raise FrameDegenerate("latitude chart degenerates at the poles")
    V = _as_vec(veronese_map(xyz))
    dV1 = _as_vec(_veronese_differential(xyz, d1))
    dV2 = _as_vec(_veronese_differential(xyz, d2))
    e = np.eye(5)
    frame = _gram_schmidt([V, dV1, dV2, e[seeds[0]], e[seeds[1]]])
    return V, frame[3], frame[4]


def cartan_tube(p, s, seeds=None, radius=TUBE_RADIUS):
    """Point of Cartan's minimal isoparametric hypersurface in S^4."""
    V, xi1, xi2 = veronese(p, seeds)
    return V * math.cos(radius) + (xi1 * J.cos(s) + xi2 * J.sin(s)) * math.sin(radius)


def tube_spherical_curvatures(p, s, seeds=None):
    """Principal curvatures and mean curvature of the tube as a hypersurface of S^4."""
    center = [float(p[0]), float(p[1]), float(s)]
    u = Jet.variables(center, 2)
    X = cartan_tube((u[0], u[1]), u[2], seeds)
    dX = Jet.stack([X.diff(i) for i in range(3)])
    dX0 = np.asarray(dX.value)
    X0 = np.asarray(X.value)
    # sphere normal: orthogonal to the position and to the tangent space
    nu = normal_at(np.vstack([dX0, X0]), 1)
    ddX = np.array([[np.asarray(dX[i].diff(j).value) for j in range(3)] for i in range(3)])
    g = dX0 @ dX0.T
    b = ddX @ nu
    A = np.linalg.solve(g, b)
    k = np.sort(np.linalg.eigvals(A).real)[::-1]
    return k, float(np.trace(A)) / 3


# ---------------------------------------------------------------------------
# patches


def _orient_toward(patch: ImmersionPatch, u_ref, want: np.ndarray) -> ImmersionPatch:
    N = np.asarray(shape_jets(patch, u_ref).N.value)
    return patch if float(np.dot(N, want)) >= 0 else patch.flipped()


def _round_cylinder(n):
    def ev(u):
        return [J.cos(u[0]), J.sin(u[0])] + list(u[1:])

    dom = tuple(CATALOG["round_cylinder"]["domain"](n))
    p = ImmersionPatch(n, dom, ev, 1, "round_cylinder")
    return _orient_toward(p, [0.0] * n, -np.eye(n + 1)[0])


def _unit_sphere(n):
    def ev(u):
        coords = []
        prod = 1.0
        for k in range(n - 1):
            coords.append(prod * J.cos(u[k]))
            prod = prod * J.sin(u[k])
        coords.append(prod * J.cos(u[n - 1]))
        coords.append(prod * J.sin(u[n - 1]))
        return coords

    dom = tuple(CATALOG["unit_sphere"]["domain"](n))
    p = ImmersionPatch(n, dom, ev, 1, "unit_sphere")
    ref = [math.pi / 2] * (n - 1) + [0.0]
    return _orient_toward(p, ref, -p.point(ref))


def _minimal_cylinder(n, theta):
    ct, st = math.cos(theta), math.sin(theta)

    def ev(u):
        v, w = u[0], u[1]
        if abs(float(v.value)) >= 300:
            raise ChartSingularity("cosh v leaves the representable range")
        chv, shv, cw, sw = J.cosh(v), J.sinh(v), J.cos(w), J.sin(w)
        cat = [chv * cw, chv * sw, v]
        hel = [shv * sw, -shv * cw, w]
        return [ct * a + st * b for a, b in zip(cat, hel)] + list(u[2:])

    dom = tuple(CATALOG["minimal_cylinder"]["domain"](n))
    return ImmersionPatch(n, dom, ev, 1, f"minimal_cylinder(theta={theta:.17g})")


def _cone_cylinder(n):
    k = 1 / math.sqrt(2.0)

    def ev(u):
        r, a, b = u[0], u[1], u[2]
        if float(r.value) <= 0:
            raise ChartSingularity("cone vertex r <= 0")
        return [k * r * J.cos(a), k * r * J.sin(a), k * r * J.cos(b), k * r * J.sin(b)] + list(u[3:])

    dom = tuple(CATALOG["cone_cylinder"]["domain"](n))
    return ImmersionPatch(n, dom, ev, 1, "cone_cylinder")


def cartan_m(n: int) -> float:
    return math.sqrt((n - 1) / n)


def _cartan_example(n, seeds):
    m = cartan_m(n)
    nh = n - 4  # number of free hyperbolic coordinates besides t

    def ev(u):
        t = u[0]
        if float(t.value) <= 0:
            raise ChartSingularity("hyperbolic chart requires t > 0")
        a = list(u[1:1 + nh])
        p1, p2, s = u[1 + nh], u[2 + nh], u[3 + nh]
        if abs(math.cos(float(p1.value))) < FRAME_MIN_NORM:
            raise ChartSingularity("latitude chart degenerates at the poles")
        y = cartan_tube((p1, p2), s, seeds)
        inv_t = 1 / t
        return [ai * inv_t for ai in a] + list(y * (m * inv_t))

    dom = tuple(CATALOG["cartan_example"]["domain"](n))
    return ImmersionPatch(n, dom, ev, 1, "cartan_example")


def hyperbolic_point(n: int, t, a):
    """Coordinates (x0, x1..x_{n-4}, x_{n-3}) of the chart point on H^{n-3}_{-m}."""
    m = cartan_m(n)
    a = list(a)
    return [t] + a + [(sum(x * x for x in a) + m * m) / t]


def make_example(spec: ExampleSpec) -> ImmersionPatch:
    spec = spec.validate()
    n = spec.n
    if spec.id == "round_cylinder":
        return _round_cylinder(n)
    if spec.id == "unit_sphere":
        return _unit_sphere(n)
    if spec.id == "minimal_cylinder":
        return _minimal_cylinder(n, float(spec.params.get("theta", 0.0)))
    if spec.id == "cone_cylinder":
        return _cone_cylinder(n)
    # cartan_example: the Veronese frame seeds are fixed once per patch
    win = default_window(spec)
    p_mid = [0.5 * (lo + hi) for lo, hi in win[n - 3:n - 1]]
    seeds = choose_frame_seeds(p_mid)
    return _cartan_example(n, seeds)


def cartan_isometric_partner(patch: ImmersionPatch, scale: float = 1.5, shear: float = 0.3) -> ImmersionPatch:
    """The Cartan example precomposed with (t, a1, ...) -> (scale t, a1 + shear t, ...).

    The map is an isometry of the Moebius metric of the Cartan example, so the
    partner shares that metric at every chart point.
    """
    if scale <= 0:
        raise InvalidSpec("scale must be positive")
    base = patch.evaluator

    def ev(u):
        t = u[0]
        moved = [t * scale] + list(u[1:])
        if patch.n > 4:
            moved[1] = u[1] + t * shear
        return base(moved)

    return ImmersionPatch(patch.n, patch.domain, ev, patch.orientation,
                          f"{patch.name}(scale={scale:.17g}, shear={shear:.17g})")
