"""Fundamental forms, principal curvatures/vectors, and derivatives of
curvature along the principal vector fields.

The pointwise API (`fundamental_forms`, `principal_data`) mirrors the
vectorised field evaluators used by the contour tracers; both share the
same closed-form 2x2 generalised eigensolve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import numdiff
from .errors import NonRegularPointError, UmbilicNeighborhoodError
from .surfaces import Jet5, Surface, eval_jet

#: relative gap below which a point is treated as an umbilic; the
#: discriminant route cannot resolve gaps below ~sqrt(eps)*|kappa|, so this
#: matches the package-wide zero tolerance rather than anything tighter
UMBILIC_GAP_TOL = 1e-7

#: directional-derivative queries are refused within this many steps of an umbilic
GUARD_STEPS = 10.0


@dataclass(frozen=True)
class FundamentalForms:
    E: float
    F: float
    G: float
    L: float
    M: float
    N: float

    @property
    def metric_det(self) -> float:
        return self.E * self.G - self.F**2

    def matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        one = np.array([[self.E, self.F], [self.F, self.G]])
        two = np.array([[self.L, self.M], [self.M, self.N]])
        return one, two


@dataclass(frozen=True)
class PrincipalData:
    """Principal curvatures kappa1 >= kappa2 with parameter-space vectors.

    ``v1``/``v2`` are the (xi, zeta) pairs scaled so xi g_u + zeta g_v has
    unit length; v1 is the blue vector (larger curvature), v2 the red one.
    """

    kappa1: float
    kappa2: float
    v1: Tuple[float, float]
    v2: Tuple[float, float]
    umbilic: bool

    @property
    def gap(self) -> float:
        return self.kappa1 - self.kappa2


def fundamental_forms(jet: Jet5) -> FundamentalForms:
    """First and second fundamental form coefficients at the jet's point."""
    gu, gv = jet.p(1, 0), jet.p(0, 1)
    e = float(gu @ gu)
    f = float(gu @ gv)
    g = float(gv @ gv)
    if e * g - f * f <= 1e-24:
        raise NonRegularPointError(
            f"degenerate metric (EG - F^2 <= 0) at {jet.point}"
        )
    cross = np.cross(gu, gv)
    n = cross / np.linalg.norm(cross)
    return FundamentalForms(
        E=e,
        F=f,
        G=g,
        L=float(jet.p(2, 0) @ n),
        M=float(jet.p(1, 1) @ n),
        N=float(jet.p(0, 2) @ n),
    )


def unit_normal(jet: Jet5) -> np.ndarray:
    cross = np.cross(jet.p(1, 0), jet.p(0, 1))
    nrm = np.linalg.norm(cross)
    if nrm < 1e-12:
        raise NonRegularPointError(f"surface not regular at {jet.point}")
    return cross / nrm


def _orient(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Deterministic sign: first component of magnitude > tol made positive."""
    for comp in vec:
        if abs(comp) > tol:
            return vec if comp > 0 else -vec
    return vec


def principal_data(forms: FundamentalForms, jet: Jet5) -> PrincipalData:
    """Solve the 2x2 generalised eigenproblem II w = kappa I w."""
    one, two = forms.matrices()
    det_i = forms.metric_det
    trace = (
        forms.E * forms.N - 2.0 * forms.F * forms.M + forms.G * forms.L
    ) / det_i
    det_s = (forms.L * forms.N - forms.M**2) / det_i
    disc = max(trace * trace - 4.0 * det_s, 0.0)
    root = np.sqrt(disc)
    k1 = 0.5 * (trace + root)
    k2 = 0.5 * (trace - root)
    scale = max(1.0, abs(k1), abs(k2))
    umbilic = (k1 - k2) < UMBILIC_GAP_TOL * scale

    def eigenvector(kappa):
        m = two - kappa * one
        # rows of m annihilate the eigenvector; pick the better-conditioned one
        r0 = np.array([-m[0, 1], m[0, 0]])
        r1 = np.array([-m[1, 1], m[1, 0]])
        w = r0 if np.linalg.norm(r0) >= np.linalg.norm(r1) else r1
        nrm = np.linalg.norm(w)
        if nrm < 1e-15:  # umbilic: every direction principal
            w = np.array([1.0, 0.0])
        else:
            w = w / nrm
        length = np.sqrt(w @ one @ w)
        return _orient(w / length)

    if umbilic:
        v1 = eigenvector(k1)
        # any I-orthonormal completion
        gu, gv = jet.p(1, 0), jet.p(0, 1)
        n = unit_normal(jet)
        t1 = v1[0] * gu + v1[1] * gv
        t2 = np.cross(n, t1)
        # solve t2 = xi gu + zeta gv in the tangent plane
        a = np.array([[gu @ gu, gu @ gv], [gu @ gv, gv @ gv]])
        b = np.array([gu @ t2, gv @ t2])
        v2 = _orient(np.linalg.solve(a, b))
    else:
        v1 = eigenvector(k1)
        v2 = eigenvector(k2)
    return PrincipalData(
        kappa1=float(k1),
        kappa2=float(k2),
        v1=(float(v1[0]), float(v1[1])),
        v2=(float(v2[0]), float(v2[1])),
        umbilic=bool(umbilic),
    )


def principal_at(surface: Surface, point) -> PrincipalData:
    jet = eval_jet(surface, point, order=2)
    return principal_data(fundamental_forms(jet), jet)


# ---------------------------------------------------------------------------
# vectorised field evaluation


def form_fields(surface: Surface, u, v) -> dict:
    """Vectorised E..N plus first derivatives and the unit normal."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    stack = surface.jet_stack(u, v, order=2)
    gu, gv = stack[(1, 0)], stack[(0, 1)]
    guu, guv, gvv = stack[(2, 0)], stack[(1, 1)], stack[(0, 2)]
    cross = np.cross(gu, gv)
    nrm = np.linalg.norm(cross, axis=-1)
    n = cross / nrm[..., None]
    dot = lambda a, b: np.einsum("...k,...k->...", a, b)  # noqa: E731
    return {
        "stack": stack,
        "E": dot(gu, gu),
        "F": dot(gu, gv),
        "G": dot(gv, gv),
        "L": dot(guu, n),
        "M": dot(guv, n),
        "N": dot(gvv, n),
        "normal": n,
        "cross_norm": nrm,
    }


def apply_orientation(w: np.ndarray, mode: str) -> np.ndarray:
    """Deterministic sign convention for (possibly stacked) 2-vectors.

    ``first``: first component of magnitude > 1e-12 made positive (the
    exposed PrincipalData convention).  ``dominant``: the larger-magnitude
    component made positive.  The two conventions have disjoint flip loci,
    which the ridge tracer exploits near umbilics.
    """
    w = np.asarray(w, dtype=float)
    x, y = w[..., 0], w[..., 1]
    if mode == "first":
        lead = np.where(np.abs(x) > 1e-12, x, y)
    elif mode == "dominant":
        lead = np.where(np.abs(x) >= np.abs(y), x, y)
    else:
        raise ValueError(f"unknown orientation mode {mode!r}")
    sign = np.sign(np.where(lead == 0.0, 1.0, lead))
    return w * sign[..., None]


def curvature_fields(surface: Surface, u, v, orient: str = "first") -> dict:
    """Vectorised kappa1 >= kappa2, gap, and unit principal vector fields."""
    f = form_fields(surface, u, v)
    det_i = f["E"] * f["G"] - f["F"] ** 2
    trace = (f["E"] * f["N"] - 2.0 * f["F"] * f["M"] + f["G"] * f["L"]) / det_i
    det_s = (f["L"] * f["N"] - f["M"] ** 2) / det_i
    disc = np.maximum(trace**2 - 4.0 * det_s, 0.0)
    root = np.sqrt(disc)
    k1 = 0.5 * (trace + root)
    k2 = 0.5 * (trace - root)

    def eigvec(kappa):
        m00 = f["L"] - kappa * f["E"]
        m01 = f["M"] - kappa * f["F"]
        m11 = f["N"] - kappa * f["G"]
        w0 = np.stack([-m01, m00], axis=-1)
        w1 = np.stack([-m11, m01], axis=-1)
        pick = (np.linalg.norm(w0, axis=-1) >= np.linalg.norm(w1, axis=-1))[..., None]
        w = np.where(pick, w0, w1)
        nrm = np.linalg.norm(w, axis=-1)
        bad = nrm < 1e-15
        w = np.where(bad[..., None], np.array([1.0, 0.0]), w / np.where(bad, 1.0, nrm)[..., None])
        length = np.sqrt(
            f["E"] * w[..., 0] ** 2
            + 2.0 * f["F"] * w[..., 0] * w[..., 1]
            + f["G"] * w[..., 1] ** 2
        )
        return apply_orientation(w / length[..., None], orient)

    return {
        "kappa1": k1,
        "kappa2": k2,
        "gap": k1 - k2,
        "v1": eigvec(k1),
        "v2": eigvec(k2),
        "forms": f,
    }


def kappa_fn(surface: Surface, sheet: int):
    def fn(p):
        pd = principal_at(surface, p)
        return pd.kappa1 if sheet == 1 else pd.kappa2

    return fn


def principal_vector_fn(surface: Surface, sheet: int):
    def fn(p):
        pd = principal_at(surface, p)
        return np.asarray(pd.v1 if sheet == 1 else pd.v2)

    return fn


# ---------------------------------------------------------------------------
# directional derivatives


@dataclass(frozen=True)
class CurvatureDerivatives:
    """Iterated derivatives v_i^(m) kappa_i plus the cross value v_i kappa_j.

    Each entry is a ``(value, scale)`` pair; pass both to
    :func:`parafront.numdiff.is_zero` for tolerance decisions.
    """

    sheet: int
    iterated: Tuple[Tuple[float, float], ...]
    cross: Tuple[float, float]
    step: float


def _umbilic_guard(surface: Surface, point, h: float) -> None:
    """Refuse the query when an umbilic sits within ~GUARD_STEPS * h."""
    p = np.asarray(point, dtype=float)
    radius = GUARD_STEPS * h
    gaps = []
    for du, dv in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)]:
        pd = principal_at(surface, p + radius * np.array([du, dv]) / max(1.0, np.hypot(du, dv)))
        gaps.append(pd.gap)
        if pd.umbilic:
            raise UmbilicNeighborhoodError(
                f"umbilic within guard radius {radius:.2e} of {tuple(p)}; "
                "use the umbilic pathway"
            )
    gaps = np.asarray(gaps)
    slope = (gaps.max() - gaps.min()) / radius
    if gaps.min() < 2.0 * radius * max(slope, 1e-6):
        raise UmbilicNeighborhoodError(
            f"umbilic within guard radius {radius:.2e} of {tuple(p)}; "
            "use the umbilic pathway"
        )


def directional_curvature_derivatives(
    surface: Surface, point, sheet: int, order: int = 3
) -> CurvatureDerivatives:
    """Iterated derivatives of kappa_sheet along the v_sheet field.

    The field is re-evaluated at the displaced points, so the second
    value is v(v(kappa)), not a straight-line second derivative.  The
    cross value is the first derivative of the *other* curvature along
    the same field.
    """
    if sheet not in (1, 2):
        raise ValueError("sheet must be 1 or 2")
    if not 1 <= order <= 3:
        raise ValueError("order must be in 1..3")
    base = principal_at(surface, point)
    h = numdiff.default_step(base.kappa1, base.kappa2)
    _umbilic_guard(surface, point, h)

    other = 2 if sheet == 1 else 1
    kappa = kappa_fn(surface, sheet)
    kappa_other = kappa_fn(surface, other)
    direction = principal_vector_fn(surface, sheet)

    iterated = numdiff.field_derivatives(kappa, point, direction, h, order)
    cross = numdiff.field_derivatives(kappa_other, point, direction, h, 1)[0]
    return CurvatureDerivatives(
        sheet=sheet, iterated=tuple(iterated), cross=cross, step=h
    )


def raw_directional_value(
    surface: Surface, point, vec_sheet: int, kappa_sheet: int, h: float,
    anchor=None,
) -> float:
    """First derivative of kappa_[kappa_sheet] along v_[vec_sheet], no guard.

    Tracer-internal: grid-level masking already excludes umbilic
    neighbourhoods, so this skips the guard probes for speed.  When an
    ``anchor`` direction is given the principal vector is sign-aligned to
    it, which keeps the value consistent with a caller-local orientation.
    """
    p = np.asarray(point, dtype=float)
    w = np.asarray(principal_vector_fn(surface, vec_sheet)(p))
    if anchor is not None and float(np.dot(w, anchor)) < 0:
        w = -w
    kappa = kappa_fn(surface, kappa_sheet)

    def quot(step):
        return (kappa(p + step * w) - kappa(p - step * w)) / (2.0 * step)

    d1 = quot(h)
    d2 = quot(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def curvature_hessian(surface: Surface, point, sheet: int):
    """Hessian of kappa_sheet with respect to the (v1, v2) frame fields."""
    base = principal_at(surface, point)
    h = numdiff.default_step(base.kappa1, base.kappa2)
    _umbilic_guard(surface, point, h)
    kappa = kappa_fn(surface, sheet)
    return numdiff.field_hessian(
        kappa, point, principal_vector_fn(surface, 1), principal_vector_fn(surface, 2), h
    )
