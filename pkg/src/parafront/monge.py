"""Reduction of a surface point to Monge normal form in principal axes.

The surface is re-expanded as a height function over its tangent plane:
translate to the point, rotate so e3 is the unit normal and (e1, e2) are
the principal directions, then solve for the height Taylor series to
degree five by formal inversion of the tangential coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Dict, Tuple

import numpy as np

from .curvature import fundamental_forms, principal_data, unit_normal
from .errors import NonRegularPointError, NumericalQualityError
from .polyjet import Poly2, invert_map, rotate
from .surfaces import JET_ORDER, Surface, eval_jet

FRAME_ORTHO_TOL = 1e-12
INVERSION_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class Frame:
    """Right-handed orthonormal frame; e3 is the unit surface normal."""

    origin: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    def __post_init__(self):
        basis = np.stack([self.e1, self.e2, self.e3])
        gram = basis @ basis.T
        if np.abs(gram - np.eye(3)).max() > FRAME_ORTHO_TOL * 10:
            raise NumericalQualityError("frame is not orthonormal")
        if np.linalg.det(basis) < 0:
            raise NumericalQualityError("frame is not right-handed")


@dataclass(frozen=True)
class MongeJet:
    """Local normal form at a point: curvatures and degree-5 coefficients.

    ``height`` is the full height polynomial over the tangent plane
    (quadratic part (k1 u^2 + k2 v^2)/2 plus the a_ij tail); ``a`` holds
    the derivative-normalised coefficients for 3 <= i + j <= 5.
    """

    point: Tuple[float, float]
    frame: Frame
    k1: float
    k2: float
    a: Dict[Tuple[int, int], float]
    umbilic: bool
    height: Poly2

    def a_coeff(self, i: int, j: int) -> float:
        return self.a.get((i, j), 0.0)


def _tangent_vector(jet, pair) -> np.ndarray:
    return pair[0] * jet.p(1, 0) + pair[1] * jet.p(0, 1)


def to_monge(surface: Surface, point, order: int = JET_ORDER) -> MongeJet:
    """Monge normal form of ``surface`` at ``point`` (k1 >= k2).

    At umbilics the tangent frame is the canonical pair built from the
    chart (normalised g_u completed by n x e1); downstream sign
    quantities are rotation-invariant there.
    """
    jet = eval_jet(surface, point, order)
    gu, gv = jet.p(1, 0), jet.p(0, 1)
    if np.linalg.norm(np.cross(gu, gv)) <= 1e-12:
        raise NonRegularPointError(f"surface not regular at {tuple(point)}")
    n = unit_normal(jet)
    forms = fundamental_forms(jet)
    pdata = principal_data(forms, jet)

    if pdata.umbilic:
        e1 = gu / np.linalg.norm(gu)
    else:
        e1 = _tangent_vector(jet, pdata.v1)
        e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    frame = Frame(origin=jet.p(0, 0).copy(), e1=e1, e2=e2, e3=n)

    # tangential/normal coordinates of the displacement as degree-5 series
    def component(axis):
        return Poly2.from_taylor(
            {
                (i, j): float((jet.p(i, j) - (frame.origin if i == j == 0 else 0.0)) @ axis)
                for (i, j) in jet.partials
            },
            order,
        )

    x = component(e1)
    y = component(e2)
    z = component(n)
    p, q, residual = invert_map(x, y)
    if residual > INVERSION_RESIDUAL_TOL:
        raise NumericalQualityError(
            f"tangent-plane Taylor inversion residual {residual:.2e} exceeds "
            f"{INVERSION_RESIDUAL_TOL:.0e} at {tuple(point)}"
        )
    height = z.compose(p, q)

    lin = max(abs(height.coeff(1, 0)), abs(height.coeff(0, 1)))
    k1 = height.taylor_coeff(2, 0)
    k2 = height.taylor_coeff(0, 2)
    kscale = max(abs(k1), abs(k2), 1.0)
    if lin > 1e-9 * kscale:
        raise NumericalQualityError(
            f"height function has linear part {lin:.2e} at {tuple(point)}"
        )
    cross = height.taylor_coeff(1, 1)
    if not pdata.umbilic and abs(cross) > 1e-9 * kscale:
        raise NumericalQualityError(
            f"quadratic cross term {cross:.2e} survived principal-axis "
            f"alignment at {tuple(point)}"
        )
    if k1 < k2:  # defensive: swap axes keeping a right-handed frame
        swap = rotate(height, np.pi / 2.0)
        return _finalize(point, Frame(frame.origin, e2, -e1, n), swap, pdata.umbilic)
    return _finalize(point, frame, height, pdata.umbilic)


def _finalize(point, frame, height: Poly2, umbilic: bool) -> MongeJet:
    a = {}
    for i in range(height.deg + 1):
        for j in range(height.deg + 1 - i):
            if 3 <= i + j <= height.deg:
                val = height.taylor_coeff(i, j)
                if val != 0.0:
                    a[(i, j)] = val
    return MongeJet(
        point=(float(point[0]), float(point[1])),
        frame=frame,
        k1=height.taylor_coeff(2, 0),
        k2=height.taylor_coeff(0, 2),
        a=a,
        umbilic=umbilic,
        height=height,
    )


def rotate_frame(monge: MongeJet, theta: float) -> MongeJet:
    """Rotate the tangent frame by ``theta`` and recompute coefficients.

    Meaningful at umbilics, where the principal-axis choice is free; the
    height function transforms by precomposition with the rotation.
    """
    ct, st = np.cos(theta), np.sin(theta)
    f = monge.frame
    e1 = ct * f.e1 + st * f.e2
    e2 = -st * f.e1 + ct * f.e2
    height = rotate(monge.height, theta)
    return _finalize(monge.point, Frame(f.origin, e1, e2, f.e3), height, monge.umbilic)


def reconstruction_error(surface: Surface, monge: MongeJet, radius: float, n: int = 24) -> float:
    """Max height mismatch of the degree-5 jet on a circle of sample points.

    Samples surface points displaced by ~radius in the parameter chart,
    expresses them in the Monge frame, and compares the normal coordinate
    against the height polynomial; the mismatch must shrink like r^6.
    """
    u0, v0 = monge.point
    f = monge.frame
    jet = eval_jet(surface, monge.point, order=1)
    gnorm = max(np.linalg.norm(jet.p(1, 0)), np.linalg.norm(jet.p(0, 1)))
    worst = 0.0
    for k in range(n):
        ang = 2.0 * np.pi * k / n
        du, dv = radius * np.cos(ang) / gnorm, radius * np.sin(ang) / gnorm
        pnt = surface.jet_stack(np.asarray(u0 + du), np.asarray(v0 + dv), 0)[(0, 0)]
        rel = np.asarray(pnt).reshape(3) - f.origin
        x, y, z = rel @ f.e1, rel @ f.e2, rel @ f.e3
        worst = max(worst, abs(z - monge.height(x, y)))
    return worst
