"""Ridges, sub-parabolic lines, CPC lines, and umbilics.

Point queries (ridge order, sub-parabolic flag, umbilic type) sit on top
of the directional curvature derivatives; the tracers run marching
squares over vectorised curvature fields, with adaptive subdivision for
ambiguous cells and a separate detector for degenerate (isolated-point /
crossing) topology, which marching squares alone cannot see.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize

from . import numdiff
from .curvature import (
    UMBILIC_GAP_TOL,
    curvature_fields,
    directional_curvature_derivatives,
    form_fields,
    kappa_fn,
    principal_at,
    raw_directional_value,
)
from .errors import GeometryError, NumericalQualityError
from .monge import MongeJet
from .numdiff import is_zero
from .surfaces import Surface

BLUE, RED = "blue", "red"
COLORS = (BLUE, RED)

SMOOTH_ARC = "SmoothArc"
ISOLATED_POINT = "IsolatedPoint"
CROSSING = "Crossing"

Region = Tuple[Tuple[float, float], Tuple[float, float]]


def _sheet_of(color: str) -> int:
    if color not in COLORS:
        raise ValueError(f"color must be 'blue' or 'red', got {color!r}")
    return 1 if color == BLUE else 2


# ---------------------------------------------------------------------------
# point queries


@dataclass(frozen=True)
class RidgeInfo:
    """Ridge order with the witnessing derivative values.

    ``order`` is None when the point is not a ridge point, 1 or 2 for the
    decided orders, and 3 meaning "three or higher" (order-5 jets cannot
    split 3 from above).  ``witnesses`` holds v^(m) kappa for m = 1..3.
    """

    color: str
    order: Optional[int]
    witnesses: Tuple[float, ...]

    @property
    def is_ridge(self) -> bool:
        return self.order is not None


def ridge_info(surface: Surface, point, color: str) -> RidgeInfo:
    sheet = _sheet_of(color)
    der = directional_curvature_derivatives(surface, point, sheet, order=3)
    values = tuple(v for v, _ in der.iterated)
    zeros = [is_zero(v, s) for v, s in der.iterated]
    if not zeros[0]:
        order = None
    elif not zeros[1]:
        order = 1
    elif not zeros[2]:
        order = 2
    else:
        order = 3
    return RidgeInfo(color=color, order=order, witnesses=values)


@dataclass(frozen=True)
class SubParabolicInfo:
    color: str
    flag: bool
    witness: float


def is_subparabolic(surface: Surface, point, color: str) -> SubParabolicInfo:
    """Whether the other sheet's curvature is critical along this color's field."""
    sheet = _sheet_of(color)
    der = directional_curvature_derivatives(surface, point, sheet, order=1)
    value, scale = der.cross
    return SubParabolicInfo(color=color, flag=is_zero(value, scale), witness=value)


# ---------------------------------------------------------------------------
# umbilics


@dataclass(frozen=True)
class UmbilicReport:
    gamma: float
    gamma_prime: float
    klass: str  # Elliptic | Hyperbolic | RightAngledHyperbolic | Degenerate


def classify_umbilic(monge: MongeJet) -> UmbilicReport:
    """Umbilic type from the cubic part of the Monge form.

    Gamma is the 4x4 resultant-style determinant of the cubic
    coefficients (the cubic's discriminant is -Gamma); Gamma' is the 3x3
    determinant whose vanishing marks the right-angled case.
    """
    if not monge.umbilic:
        raise GeometryError("classify_umbilic requires an umbilic Monge jet")
    a30 = monge.a_coeff(3, 0)
    a21 = monge.a_coeff(2, 1)
    a12 = monge.a_coeff(1, 2)
    a03 = monge.a_coeff(0, 3)
    g4 = np.array(
        [
            [a30, 2 * a21, a12, 0.0],
            [0.0, a30, 2 * a21, a12],
            [a21, 2 * a12, a03, 0.0],
            [0.0, a21, 2 * a12, a03],
        ]
    )
    gamma = float(np.linalg.det(g4))
    gscale = float(np.prod(np.abs(g4).sum(axis=1)))
    g3 = np.array([[1.0, 0.0, 1.0], [a30, a21, a12], [a21, a12, a03]])
    gamma_prime = float(np.linalg.det(g3))
    gp_scale = float(np.prod(np.abs(g3).sum(axis=1)))
    if is_zero(gamma, gscale):
        klass = "Degenerate"
    elif gamma < 0:
        klass = "Elliptic"
    elif is_zero(gamma_prime, gp_scale):
        klass = "RightAngledHyperbolic"
    else:
        klass = "Hyperbolic"
    return UmbilicReport(gamma=gamma, gamma_prime=gamma_prime, klass=klass)


@dataclass(frozen=True)
class UmbilicPoint:
    point: Tuple[float, float]
    position: np.ndarray
    gap: float


def find_umbilics(
    surface: Surface, region: Region, grid: int = 200
) -> List[UmbilicPoint]:
    """Locate umbilics in a parameter region.

    Scans the squared curvature gap on a grid for local minima, then
    refines each candidate by solving the smooth proportionality
    equations (EM - FL, EN - GL) = 0, which vanish exactly at umbilics.
    """
    (u0, u1), (v0, v1) = region
    us = np.linspace(u0, u1, grid + 1)
    vs = np.linspace(v0, v1, grid + 1)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    mask = surface.domain_mask(uu, vv)
    safe_u = np.where(mask, uu, 0.5 * (u0 + u1))
    safe_v = np.where(mask, vv, 0.5 * (v0 + v1))
    cf = curvature_fields(surface, safe_u, safe_v)
    gap2 = np.where(mask, cf["gap"] ** 2, np.inf)

    # local minima on the grid (8-neighbour)
    candidates = []
    interior = gap2[1:-1, 1:-1]
    neighbours = np.stack(
        [
            gap2[:-2, 1:-1], gap2[2:, 1:-1], gap2[1:-1, :-2], gap2[1:-1, 2:],
            gap2[:-2, :-2], gap2[:-2, 2:], gap2[2:, :-2], gap2[2:, 2:],
        ]
    )
    is_min = np.isfinite(interior) & np.all(interior <= neighbours, axis=0)
    kmax = np.nanmax(np.where(mask, np.maximum(np.abs(cf["kappa1"]), np.abs(cf["kappa2"])), np.nan))
    thresh = (0.05 * max(1.0, kmax)) ** 2
    for i, j in zip(*np.nonzero(is_min)):
        if interior[i, j] < thresh:
            candidates.append((us[i + 1], vs[j + 1]))

    def residual(p):
        f = form_fields(surface, np.asarray(p[0]), np.asarray(p[1]))
        return [
            float(f["E"] * f["M"] - f["F"] * f["L"]),
            float(f["E"] * f["N"] - f["G"] * f["L"]),
        ]

    found: List[UmbilicPoint] = []
    for u, v in candidates:
        sol = scipy.optimize.root(residual, [u, v], method="hybr", tol=1e-14)
        if not sol.success:
            continue
        pu, pv = float(sol.x[0]), float(sol.x[1])
        if not np.all(surface.domain_mask(np.asarray(pu), np.asarray(pv))):
            continue
        res = np.abs(residual((pu, pv))).max()
        pd = principal_at(surface, (pu, pv))
        scale = max(1.0, abs(pd.kappa1), abs(pd.kappa2))
        if res > 1e-9 * scale or pd.gap > UMBILIC_GAP_TOL * scale:
            continue
        pos = surface.jet_stack(np.asarray(pu), np.asarray(pv), 0)[(0, 0)].reshape(3)
        if all(
            np.linalg.norm(pos - other.position) > 1e-6
            for other in found
        ):
            found.append(UmbilicPoint(point=(pu, pv), position=pos, gap=pd.gap))
    found.sort(key=lambda p: (round(p.point[0], 9), round(p.point[1], 9)))
    return found


# ---------------------------------------------------------------------------
# scalar fields over grids


@dataclass
class FieldGrid:
    us: np.ndarray
    vs: np.ndarray
    values: np.ndarray
    valid: np.ndarray
    fn: Callable  # pointwise evaluator of the same field
    #: unit direction per node for fields defined along an orientable-only-
    #: locally line field; None for globally smooth scalar fields
    w: Optional[np.ndarray] = None
    #: pointwise evaluator with the direction sign-aligned to an anchor
    fn_anchor: Optional[Callable] = None

    @property
    def cell(self) -> Tuple[float, float]:
        return float(self.us[1] - self.us[0]), float(self.vs[1] - self.vs[0])


def _grid_axes(region: Region, grid: int):
    (u0, u1), (v0, v1) = region
    return np.linspace(u0, u1, grid + 1), np.linspace(v0, v1, grid + 1)


def _kappa_grid(surface: Surface, region: Region, grid: int, sheet: int, c: float) -> FieldGrid:
    us, vs = _grid_axes(region, grid)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    valid = surface.domain_mask(uu, vv)
    cf = curvature_fields(surface, np.where(valid, uu, us[0]), np.where(valid, vv, vs[0]))
    kappa = cf["kappa1"] if sheet == 1 else cf["kappa2"]

    def fn(p):
        return kappa_fn(surface, sheet)(p) - c

    return FieldGrid(us=us, vs=vs, values=np.where(valid, kappa - c, np.nan), valid=valid, fn=fn)


def _directional_grid(
    surface: Surface,
    region: Region,
    grid: int,
    vec_sheet: int,
    kappa_sheet: int,
) -> FieldGrid:
    """Grid of the first derivative of kappa_[kappa_sheet] along v_[vec_sheet].

    Nodes too close to an umbilic (principal field undefined) are masked
    out; the tracers report the touching cells as flagged.  The node
    directions are stored alongside the values: the signed field only
    makes sense up to the orientation of the principal line field, so the
    marcher re-aligns signs cell-locally (the derivative is odd in the
    direction, so a flip is exactly a sign change of the value).
    """
    us, vs = _grid_axes(region, grid)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    valid = surface.domain_mask(uu, vv)
    u_safe = np.where(valid, uu, us[0])
    v_safe = np.where(valid, vv, vs[0])
    cf = curvature_fields(surface, u_safe, v_safe)
    kmax = float(
        np.nanmax(np.maximum(np.abs(cf["kappa1"]), np.abs(cf["kappa2"])))
    )
    h = numdiff.default_step(kmax)
    gap_scale = np.maximum(1.0, np.maximum(np.abs(cf["kappa1"]), np.abs(cf["kappa2"])))
    valid = valid & (cf["gap"] > 5.0 * h * gap_scale)
    w = cf["v1"] if vec_sheet == 1 else cf["v2"]

    def kappa_at(du, dv, step):
        ua = u_safe + step * du
        va = v_safe + step * dv
        sub = curvature_fields(surface, ua, va)
        return sub["kappa1"] if kappa_sheet == 1 else sub["kappa2"]

    def quotient(step):
        kp = kappa_at(w[..., 0], w[..., 1], step)
        km = kappa_at(-w[..., 0], -w[..., 1], step)
        return (kp - km) / (2.0 * step)

    d1 = quotient(h)
    d2 = quotient(h / 2.0)
    values = (4.0 * d2 - d1) / 3.0

    def fn(p):
        return raw_directional_value(surface, p, vec_sheet, kappa_sheet, h)

    def fn_anchor(p, anchor):
        return raw_directional_value(surface, p, vec_sheet, kappa_sheet, h, anchor)

    return FieldGrid(
        us=us,
        vs=vs,
        values=np.where(valid, values, np.nan),
        valid=valid,
        fn=fn,
        w=w,
        fn_anchor=fn_anchor,
    )


def _char_poly_grid(surface: Surface, region: Region, grid: int, c: float) -> FieldGrid:
    """(kappa1 - c)(kappa2 - c) as a smooth field (no umbilic corner)."""
    us, vs = _grid_axes(region, grid)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    valid = surface.domain_mask(uu, vv)
    f = form_fields(surface, np.where(valid, uu, us[0]), np.where(valid, vv, vs[0]))
    det_i = f["E"] * f["G"] - f["F"] ** 2
    trace = (f["E"] * f["N"] - 2 * f["F"] * f["M"] + f["G"] * f["L"]) / det_i
    det_s = (f["L"] * f["N"] - f["M"] ** 2) / det_i
    values = det_s - c * trace + c * c

    def fn(p):
        pd = principal_at(surface, p)
        return (pd.kappa1 - c) * (pd.kappa2 - c)

    return FieldGrid(us=us, vs=vs, values=np.where(valid, values, np.nan), valid=valid, fn=fn)


# ---------------------------------------------------------------------------
# marching squares


@dataclass(frozen=True)
class Polyline2:
    """Traced locus: an open/closed arc or a tagged degenerate point."""

    points: np.ndarray
    color: str
    closed: bool
    topology: str

    def to_rows(self, branch_id: int):
        return [
            (float(u), float(v), branch_id, self.color, self.topology)
            for u, v in np.atleast_2d(self.points)
        ]


@dataclass(frozen=True)
class DegeneratePoint:
    point: Tuple[float, float]
    topology: str
    value: float
    hessian_det: float


@dataclass
class TraceResult:
    polylines: List[Polyline2] = field(default_factory=list)
    flagged_cells: List[Tuple[int, int]] = field(default_factory=list)
    degenerate_points: List[DegeneratePoint] = field(default_factory=list)


def _interp(x0, x1, f0, f1):
    t = f0 / (f0 - f1)
    return x0 + t * (x1 - x0)


def _cell_segments(corners, values, fn, depth: int):
    """Segments of the zero contour inside one cell.

    ``corners`` = (x0, x1, y0, y1); ``values`` = (v00, v10, v11, v01)
    counter-clockwise from the lower-left corner.  Ambiguous saddle cells
    are resolved by the centre sample and recursively subdivided while
    the centre stays numerically on the contour (up to three levels).
    """
    x0, x1, y0, y1 = corners
    v00, v10, v11, v01 = values
    vals = np.array([v00, v10, v11, v01])
    if np.all(vals > 0) or np.all(vals < 0):
        return []
    # edge crossings: bottom, right, top, left
    pts = {}
    if v00 * v10 < 0:
        pts["b"] = (_interp(x0, x1, v00, v10), y0)
    if v10 * v11 < 0:
        pts["r"] = (x1, _interp(y0, y1, v10, v11))
    if v01 * v11 < 0:
        pts["t"] = (_interp(x0, x1, v01, v11), y1)
    if v00 * v01 < 0:
        pts["l"] = (x0, _interp(y0, y1, v00, v01))
    keys = sorted(pts)
    if len(keys) == 2:
        return [(pts[keys[0]], pts[keys[1]])]
    if len(keys) == 4:
        center_val = fn(np.array([(x0 + x1) / 2.0, (y0 + y1) / 2.0]))
        vscale = np.abs(vals).max()
        if abs(center_val) < 1e-3 * vscale and depth < 3:
            xm, ym = (x0 + x1) / 2.0, (y0 + y1) / 2.0
            vb = fn(np.array([xm, y0]))
            vr = fn(np.array([x1, ym]))
            vt = fn(np.array([xm, y1]))
            vl = fn(np.array([x0, ym]))
            vm = center_val
            segs = []
            segs += _cell_segments((x0, xm, y0, ym), (v00, vb, vm, vl), fn, depth + 1)
            segs += _cell_segments((xm, x1, y0, ym), (vb, v10, vr, vm), fn, depth + 1)
            segs += _cell_segments((xm, x1, ym, y1), (vm, vr, v11, vt), fn, depth + 1)
            segs += _cell_segments((x0, xm, ym, y1), (vl, vm, vt, v01), fn, depth + 1)
            return segs
        if center_val * v00 > 0:
            return [(pts["b"], pts["r"]), (pts["t"], pts["l"])]
        return [(pts["b"], pts["l"]), (pts["t"], pts["r"])]
    # a crossing exactly through a corner can yield odd counts; skip the cell
    return []


def _chain_segments(segments, cell_diag: float):
    """Join segments into polylines by shared endpoints."""
    if not segments:
        return []
    tol = 1e-6 * cell_diag

    def key(p):
        return (round(p[0] / tol), round(p[1] / tol))

    # contours running exactly along grid lines are emitted by the cells on
    # both sides; keep one copy and drop zero-length slivers
    seen = set()
    unique = []
    for a, b in segments:
        ka, kb = key(a), key(b)
        if ka == kb:
            continue
        sig = (min(ka, kb), max(ka, kb))
        if sig in seen:
            continue
        seen.add(sig)
        unique.append((a, b))
    segments = unique
    if not segments:
        return []

    adjacency: Dict[tuple, list] = {}
    for idx, (a, b) in enumerate(segments):
        adjacency.setdefault(key(a), []).append((idx, 0))
        adjacency.setdefault(key(b), []).append((idx, 1))

    used = [False] * len(segments)
    chains = []

    def walk(idx, end):
        pts = []
        cur, cur_end = idx, end
        while True:
            used[cur] = True
            a, b = segments[cur]
            start, stop = (a, b) if cur_end == 0 else (b, a)
            if not pts:
                pts.append(start)
            pts.append(stop)
            if len(pts) > 3 and key(stop) == key(pts[0]):
                return pts, True
            nxt = [
                (i, e)
                for (i, e) in adjacency.get(key(stop), [])
                if not used[i]
            ]
            if not nxt:
                return pts, False
            cur, cur_end = nxt[0]

    # open chains first (endpoints of degree 1)
    for k, touching in sorted(adjacency.items()):
        if len(touching) == 1 and not used[touching[0][0]]:
            idx, end = touching[0]
            pts, closed = walk(idx, end)
            chains.append((np.array(pts), closed))
    for idx in range(len(segments)):
        if not used[idx]:
            pts, _ = walk(idx, 0)
            closed = key(pts[0]) == key(pts[-1]) and len(pts) > 3
            chains.append((np.array(pts), closed))
    return chains


def _march_grid(grid_field: FieldGrid, color: str) -> TraceResult:
    us, vs = grid_field.us, grid_field.vs
    z = grid_field.values
    valid = grid_field.valid & np.isfinite(z)
    result = TraceResult()

    cell_ok = valid[:-1, :-1] & valid[1:, :-1] & valid[1:, 1:] & valid[:-1, 1:]
    flagged = np.argwhere(~cell_ok)
    result.flagged_cells = [tuple(map(int, ij)) for ij in flagged]

    w = grid_field.w
    if w is None:
        sign = np.ones((4,) + cell_ok.shape)
    else:
        # cell-local orientation: align every corner direction with the
        # lower-left one; the derivative is odd in the direction, so the
        # alignment is a per-corner sign on the values.  Shared-edge
        # crossings are invariant under a global flip of the pair, so the
        # extracted geometry stays consistent across neighbouring cells.
        anchor = w[:-1, :-1]
        dots = np.stack(
            [
                np.einsum("...k,...k->...", anchor, anchor),
                np.einsum("...k,...k->...", w[1:, :-1], anchor),
                np.einsum("...k,...k->...", w[1:, 1:], anchor),
                np.einsum("...k,...k->...", w[:-1, 1:], anchor),
            ]
        )
        sign = np.where(dots >= 0, 1.0, -1.0)

    z0 = z[:-1, :-1] * sign[0]
    z1 = z[1:, :-1] * sign[1]
    z2 = z[1:, 1:] * sign[2]
    z3 = z[:-1, 1:] * sign[3]
    with np.errstate(invalid="ignore"):
        pos = (z0 > 0) & (z1 > 0) & (z2 > 0) & (z3 > 0)
        neg = (z0 < 0) & (z1 < 0) & (z2 < 0) & (z3 < 0)
    active = cell_ok & ~(pos | neg)

    segments = []
    for i, j in np.argwhere(active):
        corners = (us[i], us[i + 1], vs[j], vs[j + 1])
        if grid_field.fn_anchor is not None and w is not None:
            anchor_vec = w[i, j]
            fn_cell = lambda p, a=anchor_vec: grid_field.fn_anchor(p, a)  # noqa: E731
        else:
            fn_cell = grid_field.fn
        # nudge exact zeros off the lattice to keep interpolation finite
        vals = tuple(
            val if val != 0.0 else 1e-300
            for val in (z0[i, j], z1[i, j], z2[i, j], z3[i, j])
        )
        segments.extend(_cell_segments(corners, vals, fn_cell, 0))

    du, dv = grid_field.cell
    diag = float(np.hypot(du, dv))
    for pts, closed in _chain_segments(segments, diag):
        # sub-cell loops are lattice artifacts of exact-zero nodes
        extent = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
        if extent < diag:
            continue
        result.polylines.append(
            Polyline2(points=pts, color=color, closed=closed, topology=SMOOTH_ARC)
        )
    return result


# ---------------------------------------------------------------------------
# degenerate-point detection


def _grid_local_minima(z: np.ndarray):
    interior = z[1:-1, 1:-1]
    neighbours = np.stack(
        [
            z[:-2, 1:-1], z[2:, 1:-1], z[1:-1, :-2], z[1:-1, 2:],
            z[:-2, :-2], z[:-2, 2:], z[2:, :-2], z[2:, 2:],
        ]
    )
    with np.errstate(invalid="ignore"):
        return np.isfinite(interior) & np.all(interior <= neighbours, axis=0)


def _detect_degenerate(grid_field: FieldGrid, region: Region) -> List[DegeneratePoint]:
    """Zero-valued critical points of the field, typed by the Morse dichotomy.

    Candidates are grid-local minima of |grad field| (estimated from the
    grid); each is refined by solving grad = 0 on the pointwise field and
    kept when the field value refines to zero.  Positive Hessian
    determinant means an isolated point of the zero set, negative a
    crossing of two smooth branches.
    """
    us, vs = grid_field.us, grid_field.vs
    z = grid_field.values
    du, dv = grid_field.cell
    gu, gv = np.gradient(z, us, vs)
    gradmag = np.hypot(gu, gv)
    minima = _grid_local_minima(gradmag)

    zscale = float(np.nanpercentile(np.abs(z), 95)) if np.isfinite(z).any() else 0.0
    if zscale < 1e-14:  # field numerically flat: nothing to type
        return []
    fd_h = 0.25 * min(du, dv)
    (u0, u1), (v0, v1) = region

    def safe_fn(p):
        try:
            return grid_field.fn(p)
        except GeometryError:
            return np.nan

    # candidates nearest to the zero level first; thin spatially and cap the
    # refinement work (each refinement costs many pointwise evaluations)
    raw = sorted(
        (
            (abs(z[i + 1, j + 1]), i, j)
            for i, j in np.argwhere(minima)
            if np.isfinite(z[i + 1, j + 1]) and abs(z[i + 1, j + 1]) <= 0.5 * zscale
        )
    )
    cands = []
    for val, i, j in raw:
        if all(max(abs(i - i2), abs(j - j2)) > 3 for _, i2, j2 in cands):
            cands.append((val, i, j))
        if len(cands) >= 12:
            break

    out: List[DegeneratePoint] = []
    for _, i, j in cands:
        p0 = np.array([us[i + 1], vs[j + 1]])

        def grad_fn(p):
            g, _ = numdiff.gradient(safe_fn, p, fd_h)
            return g

        sol = scipy.optimize.root(
            grad_fn, p0, method="hybr", tol=1e-12, options={"maxfev": 200}
        )
        if not np.all(np.isfinite(sol.x)):
            continue
        p = sol.x
        # hybr may flag "no progress" at the FD-noise floor; judge by the
        # gradient magnitude instead of sol.success
        grad_scale = zscale / max(min(du, dv), 1e-12)
        if np.linalg.norm(grad_fn(p)) > 1e-6 * max(1.0, grad_scale):
            continue
        if not (u0 - du <= p[0] <= u1 + du and v0 - dv <= p[1] <= v1 + dv):
            continue
        val = safe_fn(p)
        if not np.isfinite(val) or not is_zero(val, max(1.0, zscale)):
            continue
        hess, _ = numdiff.hessian(safe_fn, p, fd_h)
        det = float(np.linalg.det(hess))
        hscale = float(np.abs(hess).max() ** 2)
        if is_zero(det, max(hscale, 1.0)):
            continue  # not a Morse point; leave untitled
        topology = ISOLATED_POINT if det > 0 else CROSSING
        if all(np.hypot(*(p - np.asarray(q.point))) > 2 * np.hypot(du, dv) for q in out):
            out.append(
                DegeneratePoint(
                    point=(float(p[0]), float(p[1])),
                    topology=topology,
                    value=float(val),
                    hessian_det=det,
                )
            )
    return out


# ---------------------------------------------------------------------------
# tracers


def trace_cpc(surface: Surface, c: float, region: Region, grid: int = 64) -> TraceResult:
    """Constant-principal-curvature lines kappa_i = c, both sheets.

    Blue polylines come from the kappa1 sheet, red from kappa2; the
    degenerate topology (isolated points at elliptic umbilic values,
    crossings at hyperbolic ones) is detected on the smooth product field
    and reported as single-point polylines.
    """
    if grid < 16:
        raise ValueError("grid must be at least 16")
    result = TraceResult()
    for color, sheet in ((BLUE, 1), (RED, 2)):
        part = _march_grid(_kappa_grid(surface, region, grid, sheet, c), color)
        result.polylines.extend(part.polylines)
        result.flagged_cells.extend(
            cell for cell in part.flagged_cells if cell not in result.flagged_cells
        )
    degen = _detect_degenerate(_char_poly_grid(surface, region, grid, c), region)
    result.degenerate_points = degen
    for dp in degen:
        result.polylines.append(
            Polyline2(
                points=np.array([dp.point]),
                color="none",
                closed=False,
                topology=dp.topology,
            )
        )
    return result


def _trace_directional(
    surface: Surface,
    region: Region,
    grid: int,
    vec_sheet: int,
    kappa_sheet: int,
    color: str,
) -> TraceResult:
    fg = _directional_grid(surface, region, grid, vec_sheet, kappa_sheet)
    result = _march_grid(fg, color)
    _drop_jump_artifacts(result, fg)
    degen = _detect_degenerate(fg, region)
    result.degenerate_points = degen
    for dp in degen:
        result.polylines.append(
            Polyline2(
                points=np.array([dp.point]),
                color=color,
                closed=False,
                topology=dp.topology,
            )
        )
    return result


def _drop_jump_artifacts(result: TraceResult, fg: FieldGrid) -> None:
    """Split away arc spans living on orientation jumps of the principal field.

    The signed field v kappa flips sign across the deterministic-
    orientation switch locus of v without vanishing; marching squares
    emits arcs there, and chaining can weld them onto genuine contours.
    Genuine contour vertices evaluate to nearly zero relative to the
    surrounding grid magnitudes; jump vertices evaluate at full field
    magnitude.  Arcs are validated vertex by vertex and split at the
    invalid spans.
    """
    us, vs = fg.us, fg.vs
    z = np.nan_to_num(fg.values, nan=0.0)
    diag = float(np.hypot(*fg.cell))

    def local_mag(p):
        i = int(np.clip(np.searchsorted(us, p[0]) - 1, 0, len(us) - 2))
        j = int(np.clip(np.searchsorted(vs, p[1]) - 1, 0, len(vs) - 2))
        return float(np.abs(z[i : i + 2, j : j + 2]).max())

    def vertex_ok(p):
        try:
            val = abs(fg.fn(p))
        except GeometryError:
            return False
        mag = local_mag(p)
        return mag <= 0 or val <= 0.35 * mag

    kept = []
    for poly in result.polylines:
        if poly.topology != SMOOTH_ARC:
            kept.append(poly)
            continue
        pts = np.atleast_2d(poly.points)
        n = len(pts)
        ok = np.zeros(n, dtype=bool)
        evaluated = list(range(0, n, 2)) + [n - 1]
        for k in evaluated:
            ok[k] = vertex_ok(pts[k])
        for k in range(n):  # un-evaluated vertices inherit a valid neighbour
            if k % 2 == 1 and k != n - 1:
                ok[k] = ok[k - 1] or ok[min(k + 1, n - 1)]
        if ok.all():
            kept.append(poly)
            continue
        # split into maximal valid runs
        start = None
        for k in range(n + 1):
            good = k < n and ok[k]
            if good and start is None:
                start = k
            elif not good and start is not None:
                run = pts[start:k]
                if len(run) >= 2:
                    extent = float(np.linalg.norm(run.max(axis=0) - run.min(axis=0)))
                    if extent >= diag:
                        kept.append(
                            Polyline2(
                                points=run,
                                color=poly.color,
                                closed=False,
                                topology=SMOOTH_ARC,
                            )
                        )
                start = None
    result.polylines = kept


def trace_ridge(surface: Surface, color: str, region: Region, grid: int = 64) -> TraceResult:
    """Zero contour of v_i kappa_i for the requested color."""
    if grid < 16:
        raise ValueError("grid must be at least 16")
    sheet = _sheet_of(color)
    return _trace_directional(surface, region, grid, sheet, sheet, color)


def trace_subparabolic(
    surface: Surface, color: str, region: Region, grid: int = 64
) -> TraceResult:
    """Zero contour of v_i kappa_j (i the color's sheet, j the other)."""
    if grid < 16:
        raise ValueError("grid must be at least 16")
    sheet = _sheet_of(color)
    other = 2 if sheet == 1 else 1
    return _trace_directional(surface, region, grid, sheet, other, color)


# ---------------------------------------------------------------------------
# intersections


def _segment_intersection(p0, p1, q0, q1):
    r = p1 - p0
    s = q1 - q0
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-15:
        return None
    d = q0 - p0
    t = (d[0] * s[1] - d[1] * s[0]) / denom
    u = (d[0] * r[1] - d[1] * r[0]) / denom
    if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= u <= 1 + 1e-12:
        return p0 + t * r
    return None


def _polyline_segments(polys: Sequence[Polyline2]):
    for poly in polys:
        pts = np.atleast_2d(poly.points)
        for k in range(len(pts) - 1):
            yield pts[k], pts[k + 1]


@dataclass(frozen=True)
class IntersectionResult:
    count: int
    points: Tuple[Tuple[float, float], ...]


def intersect_traces(
    a: Sequence[Polyline2], b: Sequence[Polyline2], dedup_radius: float
) -> IntersectionResult:
    """Robust same-trace intersection points, deduplicated within a radius."""
    hits: List[np.ndarray] = []
    seg_b = list(_polyline_segments(b))
    for p0, p1 in _polyline_segments(a):
        lo = np.minimum(p0, p1) - dedup_radius
        hi = np.maximum(p0, p1) + dedup_radius
        for q0, q1 in seg_b:
            if np.any(np.maximum(q0, q1) < lo) or np.any(np.minimum(q0, q1) > hi):
                continue
            pt = _segment_intersection(p0, p1, q0, q1)
            if pt is not None:
                hits.append(pt)
    kept: List[np.ndarray] = []
    for pt in hits:
        if all(np.linalg.norm(pt - q) > dedup_radius for q in kept):
            kept.append(pt)
    kept.sort(key=lambda p: (round(float(p[0]), 12), round(float(p[1]), 12)))
    return IntersectionResult(
        count=len(kept), points=tuple((float(p[0]), float(p[1])) for p in kept)
    )


def cpc_ridge_intersections(
    surface: Surface, c: float, color: str, region: Region, grid: int = 64
) -> IntersectionResult:
    """Count intersections of the CPC line of one color with same-color ridges."""
    cpc = trace_cpc(surface, c, region, grid)
    ridge = trace_ridge(surface, color, region, grid)
    du = (region[0][1] - region[0][0]) / grid
    dv = (region[1][1] - region[1][0]) / grid
    radius = 2.0 * float(np.hypot(du, dv))
    cpc_arcs = [p for p in cpc.polylines if p.color == color and p.topology == SMOOTH_ARC]
    ridge_arcs = [p for p in ridge.polylines if p.topology == SMOOTH_ARC]
    return intersect_traces(cpc_arcs, ridge_arcs, radius)
