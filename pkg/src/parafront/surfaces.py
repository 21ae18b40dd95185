"""Surface models with exact partial derivatives up to total order five.

Four parametrised families are supported: Monge-form graphs, general
polynomial graphs, ellipsoids in the longitude/latitude chart, and tori
in the standard angle chart.  All derivatives are closed-form; the
evaluators are vectorised over numpy arrays of parameter points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import factorial
from typing import Dict, Tuple

import numpy as np

from .errors import ChartDomainError, SurfaceFormatError

JET_ORDER = 5

IJ = Tuple[int, int]


def _pairs(order: int):
    return [(i, j) for n in range(order + 1) for i in range(n + 1) for j in [n - i]]


@dataclass(frozen=True)
class Jet5:
    """Value and partial derivatives of the embedding at one parameter point.

    ``partials[(i, j)]`` is the 3-vector d^(i+j) g / du^i dv^j; mixed
    partials are stored once, so symmetry holds by construction.
    """

    point: Tuple[float, float]
    partials: Dict[IJ, np.ndarray]
    order: int = JET_ORDER

    def p(self, i: int, j: int) -> np.ndarray:
        return self.partials[(i, j)]


class Surface:
    """Common interface of the four surface variants."""

    name = "surface"

    def jet_stack(self, u, v, order: int = JET_ORDER) -> Dict[IJ, np.ndarray]:
        """All partials up to ``order`` at array-valued parameter points.

        Returns arrays of shape ``broadcast(u, v).shape + (3,)``.  Points
        must already satisfy :meth:`domain_mask`.
        """
        raise NotImplementedError

    def domain_mask(self, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.ones(np.broadcast(u, v).shape, dtype=bool)

    def check_point(self, point) -> None:
        u, v = point
        if not np.all(self.domain_mask(u, v)):
            raise ChartDomainError(
                f"point {tuple(point)} outside the {self.name} chart"
            )

    def to_dict(self) -> dict:
        raise NotImplementedError

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def eval_jet(surface: Surface, point, order: int = JET_ORDER) -> Jet5:
    """Exact analytic jet of the embedding at one parameter point."""
    u, v = float(point[0]), float(point[1])
    surface.check_point((u, v))
    stack = surface.jet_stack(np.asarray(u), np.asarray(v), order)
    partials = {ij: np.asarray(arr, dtype=float).reshape(3) for ij, arr in stack.items()}
    return Jet5(point=(u, v), partials=partials, order=order)


# ---------------------------------------------------------------------------
# graph surfaces


class _Graph(Surface):
    """Graph surface g(u, v) = (u, v, f(u, v)) with polynomial f."""

    #: plain monomial coefficients of f, keyed by (i, j)
    _coeffs: Dict[IJ, float]

    def _f_partial(self, u, v, a: int, b: int):
        out = np.zeros(np.broadcast(u, v).shape)
        for (i, j), cf in self._coeffs.items():
            if i < a or j < b or cf == 0.0:
                continue
            fac = cf
            for k in range(a):
                fac *= i - k
            for k in range(b):
                fac *= j - k
            out = out + fac * u ** (i - a) * v ** (j - b)
        return out

    def jet_stack(self, u, v, order: int = JET_ORDER):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        shape = np.broadcast(u, v).shape
        zeros = np.zeros(shape)
        ones = np.ones(shape)
        out = {}
        for i, j in _pairs(order):
            fz = self._f_partial(u, v, i, j)
            if (i, j) == (0, 0):
                comp = (u * ones, v * ones, fz)
            elif (i, j) == (1, 0):
                comp = (ones, zeros, fz)
            elif (i, j) == (0, 1):
                comp = (zeros, ones, fz)
            else:
                comp = (zeros, zeros, fz)
            out[(i, j)] = np.stack(np.broadcast_arrays(*comp), axis=-1)
        return out


@dataclass(frozen=True)
class MongeGraph(_Graph):
    """Monge normal form: f = (k1 u^2 + k2 v^2)/2 + sum a_ij u^i v^j / (i! j!).

    Coefficients ``a`` are the derivative-normalised ones for
    3 <= i + j <= 5; anything outside that range is rejected so the
    quadratic part is exactly the stated one.
    """

    k1: float
    k2: float
    a: Dict[IJ, float] = field(default_factory=dict)

    name = "monge"

    def __post_init__(self):
        coeffs = {(2, 0): self.k1 / 2.0, (0, 2): self.k2 / 2.0}
        for (i, j), val in self.a.items():
            if not (3 <= i + j <= 5):
                raise SurfaceFormatError(
                    f"Monge coefficient a[{i}{j}] outside degrees 3..5"
                )
            coeffs[(i, j)] = val / (factorial(i) * factorial(j))
        object.__setattr__(self, "a", dict(self.a))
        object.__setattr__(self, "_coeffs", coeffs)

    def a_coeff(self, i: int, j: int) -> float:
        return self.a.get((i, j), 0.0)

    def to_dict(self) -> dict:
        return {
            "type": "monge",
            "k1": self.k1,
            "k2": self.k2,
            "a": {f"{i}{j}": val for (i, j), val in sorted(self.a.items())},
        }


@dataclass(frozen=True)
class PolynomialGraph(_Graph):
    """Graph of an arbitrary bivariate polynomial, plain coefficients."""

    coeffs: Dict[IJ, float]

    name = "polygraph"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", dict(self.coeffs))
        object.__setattr__(self, "_coeffs", dict(self.coeffs))

    def to_dict(self) -> dict:
        return {
            "type": "polygraph",
            "coeffs": {f"{i},{j}": val for (i, j), val in sorted(self.coeffs.items())},
        }


# ---------------------------------------------------------------------------
# quadric / torus charts


def _dcos(x, n):
    return np.cos(x + n * np.pi / 2.0)


def _dsin(x, n):
    return np.sin(x + n * np.pi / 2.0)


@dataclass(frozen=True)
class Ellipsoid(Surface):
    """Ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1 in the angle chart.

    g(u, v) = (a cos u cos v, b sin u cos v, c sin v) with u the
    longitude and v in (-pi/2, pi/2); the poles are excluded because the
    chart degenerates there.
    """

    axes: Tuple[float, float, float]

    name = "ellipsoid"
    _pole_margin = 1e-8

    def __post_init__(self):
        a, b, c = self.axes
        if min(a, b, c) <= 0:
            raise SurfaceFormatError("ellipsoid semi-axes must be positive")
        if len({a, b, c}) != 3:
            raise SurfaceFormatError(
                "ellipsoid semi-axes must be pairwise distinct"
            )
        object.__setattr__(self, "axes", (float(a), float(b), float(c)))

    def domain_mask(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        mask = np.abs(v) < np.pi / 2.0 - self._pole_margin
        return np.broadcast_to(mask, np.broadcast(u, v).shape).copy()

    def check_point(self, point):
        if not np.all(self.domain_mask(*point)):
            raise ChartDomainError(
                "ellipsoid angle chart is singular at the poles (|v| = pi/2); "
                f"got point {tuple(point)}"
            )

    def jet_stack(self, u, v, order: int = JET_ORDER):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        a, b, c = self.axes
        out = {}
        for i, j in _pairs(order):
            x = a * _dcos(u, i) * _dcos(v, j)
            y = b * _dsin(u, i) * _dcos(v, j)
            if i == 0:
                z = c * _dsin(v, j) * np.ones(np.broadcast(u, v).shape)
            else:
                z = np.zeros(np.broadcast(u, v).shape)
            out[(i, j)] = np.stack(np.broadcast_arrays(x, y, z), axis=-1)
        return out

    def to_dict(self) -> dict:
        return {"type": "ellipsoid", "axes": list(self.axes)}


@dataclass(frozen=True)
class Torus(Surface):
    """Torus of revolution: g = ((R + r cos v) cos u, (R + r cos v) sin u, r sin v)."""

    R: float
    r: float

    name = "torus"

    def __post_init__(self):
        if not 0 < self.r < self.R:
            raise SurfaceFormatError("torus radii must satisfy 0 < r < R")

    def jet_stack(self, u, v, order: int = JET_ORDER):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        shape = np.broadcast(u, v).shape
        out = {}
        for i, j in _pairs(order):
            radial = (self.R + self.r * np.cos(v)) if j == 0 else self.r * _dcos(v, j)
            x = _dcos(u, i) * radial
            y = _dsin(u, i) * radial
            if i == 0:
                z = self.r * _dsin(v, j) * np.ones(shape)
            else:
                z = np.zeros(shape)
            out[(i, j)] = np.stack(np.broadcast_arrays(x, y, z), axis=-1)
        return out

    def to_dict(self) -> dict:
        return {"type": "torus", "R": self.R, "r": self.r}


# ---------------------------------------------------------------------------
# JSON interface


def _parse_ij(key: str, sep: str | None) -> IJ:
    try:
        if sep is None:
            if len(key) != 2:
                raise ValueError
            return int(key[0]), int(key[1])
        i, j = key.split(sep)
        return int(i), int(j)
    except ValueError as exc:
        raise SurfaceFormatError(f"bad coefficient key {key!r}") from exc


def _require_keys(data: dict, allowed: set):
    unknown = set(data) - allowed
    if unknown:
        raise SurfaceFormatError(f"unknown surface keys: {sorted(unknown)}")
    missing = allowed - set(data)
    if missing:
        raise SurfaceFormatError(f"missing surface keys: {sorted(missing)}")


def surface_from_dict(data: dict) -> Surface:
    if not isinstance(data, dict) or "type" not in data:
        raise SurfaceFormatError("surface description must be an object with a 'type'")
    kind = data["type"]
    try:
        if kind == "monge":
            _require_keys(data, {"type", "k1", "k2", "a"})
            a = {_parse_ij(k, None): float(val) for k, val in data["a"].items()}
            return MongeGraph(k1=float(data["k1"]), k2=float(data["k2"]), a=a)
        if kind == "polygraph":
            _require_keys(data, {"type", "coeffs"})
            coeffs = {_parse_ij(k, ","): float(val) for k, val in data["coeffs"].items()}
            return PolynomialGraph(coeffs=coeffs)
        if kind == "ellipsoid":
            _require_keys(data, {"type", "axes"})
            axes = data["axes"]
            if len(axes) != 3:
                raise SurfaceFormatError("ellipsoid needs exactly three axes")
            return Ellipsoid(axes=tuple(float(x) for x in axes))
        if kind == "torus":
            _require_keys(data, {"type", "R", "r"})
            return Torus(R=float(data["R"]), r=float(data["r"]))
    except (TypeError, ValueError, AttributeError) as exc:
        raise SurfaceFormatError(f"malformed {kind!r} surface: {exc}") from exc
    raise SurfaceFormatError(f"unknown surface type {kind!r}")


def load_surface(path) -> Surface:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SurfaceFormatError(f"cannot read surface file {path}: {exc}") from exc
    return surface_from_dict(data)
