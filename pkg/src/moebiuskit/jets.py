"""Truncated multivariate Taylor arithmetic (forward-mode jets).

A :class:`Jet` stores the Taylor coefficients ``d^a h / a!`` of a smooth
function at a fixed center, for every multi-index ``a`` of total degree at most
``order``.  Coefficients are kept in a dense graded-lexicographic layout along
the last axis of ``coeffs``; any leading axes form the *value shape*, so a
single Jet can hold a vector or matrix of scalar jets and arithmetic broadcasts
over them like numpy arrays.

Elementary functions are applied by univariate series composition::

    F(h0 + dh) = sum_k F^(k)(h0) / k! * dh^k

which is exact up to the truncation order.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Callable, Sequence

import numpy as np

from .errors import DivisionByZeroAtCenter, DomainError, OrderExceeded

MAX_DIM = 6
MAX_ORDER = 4


# ---------------------------------------------------------------------------
# index tables


class _Layout:
    """Monomial bookkeeping for one (dim, order) pair."""

    def __init__(self, dim: int, order: int):
        self.dim = dim
        self.order = order
        monos = []
        for deg in range(order + 1):
            block = []
            for combo in combinations_with_replacement(range(dim), deg):
                alpha = [0] * dim
                for i in combo:
                    alpha[i] += 1
                block.append(tuple(alpha))
            # graded lexicographic: within a degree, larger leading exponent first
            block.sort(reverse=True)
            monos.extend(block)
        self.monomials = monos
        self.index = {a: k for k, a in enumerate(monos)}
        self.size = len(monos)
        self.degree = np.array([sum(a) for a in monos])
        # number of coefficients of degree <= k, for truncation
        self.prefix = [int(np.sum(self.degree <= k)) for k in range(order + 1)]

        pi, pj, pk = [], [], []
        for i, a in enumerate(monos):
            for j, b in enumerate(monos):
                if sum(a) + sum(b) <= order:
                    pi.append(i)
                    pj.append(j)
                    pk.append(self.index[tuple(x + y for x, y in zip(a, b))])
        perm = np.argsort(pk, kind="stable")
        self.pi = np.array(pi)[perm]
        self.pj = np.array(pj)[perm]
        pk = np.array(pk)[perm]
        self.starts = np.searchsorted(pk, np.arange(self.size))

        self.factorial = np.array([math.prod(math.factorial(x) for x in a) for a in monos], dtype=float)

    def derivative_map(self, var: int):
        """Source indices and weights for d/du_var, landing in an order-1 layout."""
        lower = layout(self.dim, self.order - 1)
        src = np.empty(lower.size, dtype=int)
        weight = np.empty(lower.size)
        for k, a in enumerate(lower.monomials):
            b = list(a)
            b[var] += 1
            src[k] = self.index[tuple(b)]
            weight[k] = b[var]
        return src, weight


@lru_cache(maxsize=None)
def layout(dim: int, order: int) -> _Layout:
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"jet dimension must be in 1..{MAX_DIM}, got {dim}")
    if not 0 <= order <= MAX_ORDER:
        raise OrderExceeded(f"jet order must be in 0..{MAX_ORDER}, got {order}")
    return _Layout(dim, order)


@lru_cache(maxsize=None)
def _derivative_map(dim: int, order: int, var: int):
    return layout(dim, order).derivative_map(var)


def n_coeffs(dim: int, order: int) -> int:
    return math.comb(dim + order, order)


# ---------------------------------------------------------------------------
# the Jet type


class Jet:
    """Array of truncated Taylor expansions sharing one center."""

    __slots__ = ("dim", "order", "coeffs")
    __array_priority__ = 100

    def __init__(self, dim: int, order: int, coeffs):
        lay = layout(dim, order)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1:] != (lay.size,):
            raise ValueError(f"expected trailing axis of length {lay.size}, got shape {coeffs.shape}")
        self.dim = dim
        self.order = order
        self.coeffs = coeffs

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, dim: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (layout(dim, order).size,))
        c[..., 0] = value
        return cls(dim, order, c)

    @classmethod
    def variable(cls, var: int, center: float, dim: int, order: int) -> "Jet":
        j = cls.constant(center, dim, order)
        if order >= 1:
            alpha = [0] * dim
            alpha[var] = 1
            j.coeffs[layout(dim, order).index[tuple(alpha)]] = 1.0
        return j

    @classmethod
    def variables(cls, center: Sequence[float], order: int) -> list["Jet"]:
        dim = len(center)
        return [cls.variable(i, c, dim, order) for i, c in enumerate(center)]

    @staticmethod
    def stack(items: Sequence, axis: int = 0) -> "Jet":
        """Stack scalar or array jets (and plain numbers) into one Jet."""
        ref = next(x for x in items if isinstance(x, Jet))
        order = min(x.order for x in items if isinstance(x, Jet))
        parts = [as_jet(x, ref.dim, order).coeffs for x in items]
        ax = axis if axis >= 0 else axis - 1
        return Jet(ref.dim, order, np.stack(parts, axis=ax))

    # -- basic views ------------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def value(self) -> np.ndarray:
        """Value at the center."""
        v = self.coeffs[..., 0]
        return v if v.ndim else float(v)

    def __len__(self):
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.dim, self.order, self.coeffs[idx + (slice(None),)])

    def __repr__(self):
        return f"Jet(dim={self.dim}, order={self.order}, shape={self.shape})"

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def transpose(self, *axes) -> "Jet":
        nd = self.ndim
        axes = tuple(axes) if axes else tuple(reversed(range(nd)))
        return Jet(self.dim, self.order, self.coeffs.transpose(axes + (nd,)))

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet(self.dim, self.order, self.coeffs.reshape(shape + (self.coeffs.shape[-1],)))

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        elif isinstance(axis, int):
            axis = (axis % self.ndim,)
        else:
            axis = tuple(a % self.ndim for a in axis)
        return Jet(self.dim, self.order, self.coeffs.sum(axis=axis))

    def trace(self) -> "Jet":
        return Jet(self.dim, self.order, np.trace(self.coeffs, axis1=-3, axis2=-2))

    def copy(self) -> "Jet":
        return Jet(self.dim, self.order, self.coeffs.copy())

    # -- order bookkeeping ------------------------------------------------
    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderExceeded(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        k = layout(self.dim, self.order).prefix[order]
        return Jet(self.dim, order, self.coeffs[..., :k])

    def diff(self, var: int) -> "Jet":
        """Partial derivative d/du_var as a jet of one lower order."""
        if self.order == 0:
            raise OrderExceeded("cannot differentiate an order-0 jet")
        src, weight = _derivative_map(self.dim, self.order, var)
        return Jet(self.dim, self.order - 1, self.coeffs[..., src] * weight)

    def gradient(self) -> "Jet":
        """Stack of all first partials; the new axis is the last value axis."""
        return Jet.stack([self.diff(i) for i in range(self.dim)], axis=-1)

    def coeff(self, alpha: Sequence[int]) -> np.ndarray:
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise OrderExceeded(f"|alpha|={sum(alpha)} exceeds jet order {self.order}")
        return self.coeffs[..., layout(self.dim, self.order).index[alpha]]

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise ValueError("jets over different chart dimensions")
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return self, Jet.constant(other, self.dim, self.order)

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a.dim, a.order, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.dim, a.order, a.coeffs - b.coeffs)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.dim, a.order, b.coeffs - a.coeffs)

    def __neg__(self):
        return Jet(self.dim, self.order, -self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            return Jet(self.dim, self.order, self.coeffs * other[..., None])
        a, b = self._coerce(other)
        lay = layout(a.dim, a.order)
        prod = a.coeffs[..., lay.pi] * b.coeffs[..., lay.pj]
        return Jet(a.dim, a.order, np.add.reduceat(prod, lay.starts, axis=-1))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise DivisionByZeroAtCenter("division by zero constant")
            return Jet(self.dim, self.order, self.coeffs / other[..., None])
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Jet.constant(np.ones(self.shape), self.dim, self.order)
            base = self
            while p:
                if p & 1:
                    out = out * base
                base = base * base
                p >>= 1
            return out
        return power(self, p)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    # -- univariate composition --------------------------------------------
    def compose_univariate(self, derivs: Sequence[np.ndarray]) -> "Jet":
        """Apply F given ``derivs[k] = F^(k)(value)`` for k = 0..order."""
        dh = self.coeffs.copy()
        dh[..., 0] = 0.0
        dh = Jet(self.dim, self.order, dh)
        out = np.zeros_like(self.coeffs)
        out[..., 0] = derivs[0]
        term = dh
        for k in range(1, self.order + 1):
            out = out + term.coeffs * (np.asarray(derivs[k]) / math.factorial(k))[..., None]
            if k < self.order:
                term = term * dh
        return Jet(self.dim, self.order, out)

    def substitute(self, inner: Sequence["Jet"]) -> "Jet":
        """Compose with a map given as displacement jets ``u - center = inner``.

        ``inner`` holds one scalar jet per variable of ``self``, all with zero
        constant term, expressed in new chart variables.
        """
        if len(inner) != self.dim:
            raise ValueError("need one inner jet per variable")
        new = inner[0]
        order = min(self.order, min(x.order for x in inner))
        for x in inner:
            if np.any(np.abs(x.coeffs[..., 0]) > 0):
                raise ValueError("inner jets must vanish at the center")
        lay = layout(self.dim, order)
        powers = []
        for x in inner:
            x = x.truncate(order)
            p = [Jet.constant(1.0, new.dim, order)]
            for _ in range(order):
                p.append(p[-1] * x)
            powers.append(p)
        src = self.truncate(order).coeffs
        out = np.zeros(src.shape[:-1] + (layout(new.dim, order).size,))
        for k, alpha in enumerate(lay.monomials):
            mono = powers[0][alpha[0]]
            for i in range(1, self.dim):
                if alpha[i]:
                    mono = mono * powers[i][alpha[i]]
            out = out + src[..., k, None] * mono.coeffs
        return Jet(new.dim, order, out)


def as_jet(x, dim: int, order: int) -> Jet:
    if isinstance(x, Jet):
        return x.truncate(order) if x.order > order else x
    return Jet.constant(x, dim, order)


def matmul(a, b) -> Jet:
    """Matrix product of jet arrays (either operand may be a plain array)."""
    if not isinstance(a, Jet):
        a = np.asarray(a, dtype=float)
        if a.ndim == 1:
            return Jet(b.dim, b.order, np.einsum("j,...jkq->...kq", a, b.coeffs))
        if b.ndim == 1:
            return Jet(b.dim, b.order, np.einsum("ij,jq->iq", a, b.coeffs))
        return Jet(b.dim, b.order, np.einsum("ij,...jkq->...ikq", a, b.coeffs))
    if not isinstance(b, Jet):
        b = np.asarray(b, dtype=float)
        if b.ndim == 1:
            return Jet(a.dim, a.order, np.einsum("...ijq,j->...iq", a.coeffs, b))
        return Jet(a.dim, a.order, np.einsum("...ijq,...jk->...ikq", a.coeffs, b))
    a, b = a._coerce(b)
    lay = layout(a.dim, a.order)
    ca = a.coeffs[..., lay.pi]
    cb = b.coeffs[..., lay.pj]
    if b.ndim == 1:
        prod = np.einsum("...ijq,...jq->...iq", ca, cb)
    elif a.ndim == 1:
        prod = np.einsum("...jq,...jkq->...kq", ca, cb)
    else:
        prod = np.einsum("...ijq,...jkq->...ikq", ca, cb)
    return Jet(a.dim, a.order, np.add.reduceat(prod, lay.starts, axis=-1))


def dot(a: Jet, b: Jet) -> Jet:
    """Euclidean inner product over the last value axis."""
    return (a * b).sum(axis=-1)


# ---------------------------------------------------------------------------
# elementary functions


def reciprocal(x: Jet) -> Jet:
    v = np.asarray(x.coeffs[..., 0])
    if np.any(v == 0):
        raise DivisionByZeroAtCenter("denominator vanishes at the center")
    derivs = []
    for k in range(x.order + 1):
        derivs.append((-1) ** k * math.factorial(k) * v ** (-(k + 1)))
    return x.compose_univariate(derivs)


def power(x, p: float):
    if not isinstance(x, Jet):
        return np.power(x, p)
    v = np.asarray(x.coeffs[..., 0])
    if float(p).is_integer() and p < 0:
        return reciprocal(x ** int(-p))
    if np.any(v <= 0):
        raise DomainError(f"non-integer power {p} of a non-positive value")
    derivs = []
    c = 1.0
    for k in range(x.order + 1):
        derivs.append(c * v ** (p - k))
        c *= p - k
    return x.compose_univariate(derivs)


def sqrt(x):
    if not isinstance(x, Jet):
        if np.any(np.asarray(x) < 0):
            raise DomainError("sqrt of a negative value")
        return np.sqrt(x)
    if np.any(np.asarray(x.coeffs[..., 0]) <= 0):
        raise DomainError("sqrt of a non-positive value at the center")
    return power(x, 0.5)


def exp(x):
    if not isinstance(x, Jet):
        return np.exp(x)
    e = np.exp(x.coeffs[..., 0])
    return x.compose_univariate([e] * (x.order + 1))


def log(x):
    if not isinstance(x, Jet):
        if np.any(np.asarray(x) <= 0):
            raise DomainError("log of a non-positive value")
        return np.log(x)
    v = np.asarray(x.coeffs[..., 0])
    if np.any(v <= 0):
        raise DomainError("log of a non-positive value at the center")
    derivs = [np.log(v)]
    for k in range(1, x.order + 1):
        derivs.append((-1) ** (k - 1) * math.factorial(k - 1) * v ** (-k))
    return x.compose_univariate(derivs)


def _cyclic(x: Jet, cycle: Callable[[np.ndarray], list]) -> Jet:
    vals = cycle(x.coeffs[..., 0])
    return x.compose_univariate([vals[k % len(vals)] for k in range(x.order + 1)])


def sin(x):
    if not isinstance(x, Jet):
        return np.sin(x)
    return _cyclic(x, lambda v: [np.sin(v), np.cos(v), -np.sin(v), -np.cos(v)])


def cos(x):
    if not isinstance(x, Jet):
        return np.cos(x)
    return _cyclic(x, lambda v: [np.cos(v), -np.sin(v), -np.cos(v), np.sin(v)])


def sinh(x):
    if not isinstance(x, Jet):
        return np.sinh(x)
    return _cyclic(x, lambda v: [np.sinh(v), np.cosh(v)])


def cosh(x):
    if not isinstance(x, Jet):
        return np.cosh(x)
    return _cyclic(x, lambda v: [np.cosh(v), np.sinh(v)])


# ---------------------------------------------------------------------------
# public entry points


def jet_eval(expr: Callable, center: Sequence[float], order: int):
    """Taylor-expand ``expr`` at ``center`` to total degree ``order``.

    ``expr`` receives the list of chart-variable jets and must be written with
    the arithmetic operators and the elementary functions of this module.
    """
    center = [float(c) for c in center]
    if order > MAX_ORDER:
        raise OrderExceeded(f"order {order} exceeds the maximum {MAX_ORDER}")
    u = Jet.variables(center, order)
    return jet_array(expr(u), len(center), order)


def jet_array(nested, dim: int, order: int) -> Jet:
    """Build one Jet from a (possibly nested) list of jets and numbers."""
    if isinstance(nested, (list, tuple)):
        parts = [jet_array(x, dim, order) for x in nested]
        low = min(p.order for p in parts)
        return Jet(dim, low, np.stack([p.truncate(low).coeffs for p in parts]))
    return as_jet(nested, dim, order)


def partial(jet: Jet, alpha: Sequence[int]):
    """The partial derivative d^alpha at the center."""
    alpha = tuple(alpha)
    if len(alpha) != jet.dim:
        raise ValueError(f"multi-index must have {jet.dim} entries")
    c = jet.coeff(alpha)
    return c * math.prod(math.factorial(a) for a in alpha)


def inv(m: Jet) -> Jet:
    """Inverse of a square jet matrix by a Neumann series around its value."""
    m0 = np.asarray(m.coeffs[..., 0])
    if np.any(np.linalg.cond(m0) > 1e14):
        raise DivisionByZeroAtCenter("matrix is singular at the center")
    m0_inv = np.linalg.inv(m0)
    dm = m.coeffs.copy()
    dm[..., 0] = 0.0
    step = -matmul(m0_inv, Jet(m.dim, m.order, dm))
    base = Jet.constant(m0_inv, m.dim, m.order)
    out = base
    term = base
    for _ in range(m.order):
        term = matmul(step, term)
        out = out + term
    return out


def eye(n: int, dim: int, order: int) -> Jet:
    return Jet.constant(np.eye(n), dim, order)


def contract(subscripts: str, a: Jet, b: Jet) -> Jet:
    """``np.einsum`` for two jet operands, e.g. ``contract("kl,ijl->kij", a, b)``."""
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    a, b = a._coerce(b)
    lay = layout(a.dim, a.order)
    prod = np.einsum(f"{sa}q,{sb}q->{out}q", a.coeffs[..., lay.pi], b.coeffs[..., lay.pj])
    return Jet(a.dim, a.order, np.add.reduceat(prod, lay.starts, axis=-1))
