"""Truncated bivariate Taylor polynomial arithmetic.

Everything downstream that manipulates local expansions (height functions
over a tangent plane, distance-squared germs, unfolding rows) works with
polynomials in two variables truncated at a fixed total degree.  A
``Poly2`` stores plain monomial coefficients ``c[i, j]`` multiplying
``u**i * v**j``; entries with ``i + j > deg`` are kept at zero and every
operation truncates back to the polynomial's degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np


def _trunc_mask(deg: int) -> np.ndarray:
    idx = np.arange(deg + 1)
    return idx[:, None] + idx[None, :] <= deg


@dataclass(frozen=True)
class Poly2:
    """Bivariate polynomial truncated at total degree ``deg``."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("coefficient matrix must be square")
        c = c * _trunc_mask(c.shape[0] - 1)
        object.__setattr__(self, "c", c)

    @property
    def deg(self) -> int:
        return self.c.shape[0] - 1

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(deg: int) -> "Poly2":
        return Poly2(np.zeros((deg + 1, deg + 1)))

    @staticmethod
    def monomial(i: int, j: int, coeff: float, deg: int) -> "Poly2":
        c = np.zeros((deg + 1, deg + 1))
        if i + j <= deg:
            c[i, j] = coeff
        return Poly2(c)

    @staticmethod
    def constant(value: float, deg: int) -> "Poly2":
        return Poly2.monomial(0, 0, value, deg)

    @staticmethod
    def variables(deg: int) -> tuple["Poly2", "Poly2"]:
        return Poly2.monomial(1, 0, 1.0, deg), Poly2.monomial(0, 1, 1.0, deg)

    @staticmethod
    def from_taylor(partials: dict, deg: int) -> "Poly2":
        """Build from derivative values: coeff of u^i v^j is D^(i,j)/(i! j!)."""
        c = np.zeros((deg + 1, deg + 1))
        for (i, j), val in partials.items():
            if i + j <= deg:
                c[i, j] = val / (factorial(i) * factorial(j))
        return Poly2(c)

    # -- coefficient access -------------------------------------------

    def coeff(self, i: int, j: int) -> float:
        return float(self.c[i, j])

    def taylor_coeff(self, i: int, j: int) -> float:
        """Derivative-normalised coefficient: i! j! times the plain one."""
        return float(self.c[i, j]) * factorial(i) * factorial(j)

    def homogeneous(self, n: int) -> "Poly2":
        c = np.zeros_like(self.c)
        for i in range(n + 1):
            j = n - i
            if j <= self.deg:
                c[i, j] = self.c[i, j]
        return Poly2(c)

    def low_order_norm(self, max_order: int) -> float:
        """Max |coeff| over all terms of total degree <= max_order."""
        out = 0.0
        for i in range(self.deg + 1):
            for j in range(self.deg + 1 - i):
                if i + j <= max_order:
                    out = max(out, abs(self.c[i, j]))
        return out

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Poly2):
            return Poly2(self.c + other.c)
        return self + Poly2.constant(float(other), self.deg)

    __radd__ = __add__

    def __neg__(self):
        return Poly2(-self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly2) else -float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __mul__(self, other):
        if isinstance(other, Poly2):
            d = self.deg
            full = np.zeros((2 * d + 1, 2 * d + 1))
            # 2-D convolution; cheap at degree 5
            for i in range(d + 1):
                for j in range(d + 1 - i):
                    if self.c[i, j] != 0.0:
                        full[i : i + d + 1, j : j + d + 1] += self.c[i, j] * other.c
            return Poly2(full[: d + 1, : d + 1])
        return Poly2(self.c * float(other))

    __rmul__ = __mul__

    def partial(self, du: int, dv: int) -> "Poly2":
        c = self.c
        for _ in range(du):
            c = c[1:, :] * np.arange(1, c.shape[0])[:, None]
            c = np.pad(c, ((0, 1), (0, 0)))
        for _ in range(dv):
            c = c[:, 1:] * np.arange(1, c.shape[1])[None, :]
            c = np.pad(c, ((0, 0), (0, 1)))
        return Poly2(c)

    def compose(self, p: "Poly2", q: "Poly2") -> "Poly2":
        """Substitute u -> p, v -> q (both must vanish at the origin)."""
        if abs(p.coeff(0, 0)) > 0 or abs(q.coeff(0, 0)) > 0:
            raise ValueError("substituted series must have zero constant term")
        d = self.deg
        one = Poly2.constant(1.0, d)
        p_pow = [one]
        q_pow = [one]
        for _ in range(d):
            p_pow.append(p_pow[-1] * p)
            q_pow.append(q_pow[-1] * q)
        out = Poly2.zero(d)
        for i in range(d + 1):
            for j in range(d + 1 - i):
                if self.c[i, j] != 0.0:
                    out = out + self.c[i, j] * (p_pow[i] * q_pow[j])
        return out

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        out = np.zeros(np.broadcast(u, v).shape)
        for i in range(self.deg + 1):
            for j in range(self.deg + 1 - i):
                if self.c[i, j] != 0.0:
                    out = out + self.c[i, j] * u**i * v**j
        return out if out.shape else float(out)


def rotate(poly: Poly2, theta: float) -> Poly2:
    """Precompose with the rotation (u, v) -> (u cos t - v sin t, u sin t + v cos t)."""
    ct, st = np.cos(theta), np.sin(theta)
    u, v = Poly2.variables(poly.deg)
    return poly.compose(ct * u - st * v, st * u + ct * v)


def invert_map(x: Poly2, y: Poly2) -> tuple[Poly2, Poly2, float]:
    """Invert the formal map (u, v) -> (x(u, v), y(u, v)) around the origin.

    Both series must vanish at the origin and have an invertible linear
    part.  Returns series ``(p, q)`` in new variables with
    ``x(p, q) = u`` and ``y(p, q) = v`` through the truncation degree,
    plus the largest residual coefficient of that identity.
    """
    deg = x.deg
    a = np.array(
        [[x.coeff(1, 0), x.coeff(0, 1)], [y.coeff(1, 0), y.coeff(0, 1)]]
    )
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) < 1e-14:
        raise ValueError("map has singular linear part; cannot invert")
    ainv = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det
    u, v = Poly2.variables(deg)
    p = ainv[0, 0] * u + ainv[0, 1] * v
    q = ainv[1, 0] * u + ainv[1, 1] * v
    # each sweep fixes one more order; deg - 1 sweeps suffice
    for _ in range(deg - 1):
        ru = x.compose(p, q) - u
        rv = y.compose(p, q) - v
        p = p - (ainv[0, 0] * ru + ainv[0, 1] * rv)
        q = q - (ainv[1, 0] * ru + ainv[1, 1] * rv)
    res = max(
        np.abs((x.compose(p, q) - u).c).max(),
        np.abs((y.compose(p, q) - v).c).max(),
    )
    return p, q, float(res)
