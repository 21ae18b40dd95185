"""Finite-difference engines used by the curvature and front modules.

Scalar fields are differentiated by Richardson-extrapolated central
differences.  Derivatives along vector fields re-evaluate the field at
the displaced points, so an iterated derivative is the honest
field-theoretic v(v(f)), not a straight-line second derivative.

Every estimator returns ``(value, scale)`` where ``scale`` is the
magnitude of the raw difference quotients that produced the value.  A
computed quantity counts as zero iff ``|x| < tau * max(1, scale)``; see
:func:`is_zero`.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

ZERO_TAU = 1e-7


def is_zero(value: float, scale: float = 1.0, tau: float = ZERO_TAU) -> bool:
    return abs(value) < tau * max(1.0, abs(scale))


def _richardson(quotient: Callable[[float], float], h: float):
    d1 = quotient(h)
    d2 = quotient(h / 2.0)
    return (4.0 * d2 - d1) / 3.0, max(abs(d1), abs(d2))


def derivative(f: Callable, p, direction, h: float):
    """Directional derivative of ``f`` along a fixed direction vector."""
    p = np.asarray(p, dtype=float)
    w = np.asarray(direction, dtype=float)

    def quot(step):
        return (f(p + step * w) - f(p - step * w)) / (2.0 * step)

    return _richardson(quot, h)


def gradient(f: Callable, p, h: float):
    gu, su = derivative(f, p, (1.0, 0.0), h)
    gv, sv = derivative(f, p, (0.0, 1.0), h)
    return np.array([gu, gv]), max(su, sv)


def hessian(f: Callable, p, h: float):
    """Richardson-extrapolated central-difference Hessian of a scalar field."""
    p = np.asarray(p, dtype=float)

    def entries(step):
        f0 = f(p)
        fu = f(p + [step, 0.0]) + f(p - [step, 0.0])
        fv = f(p + [0.0, step]) + f(p - [0.0, step])
        fpp = f(p + [step, step])
        fpm = f(p + [step, -step])
        fmp = f(p + [-step, step])
        fmm = f(p + [-step, -step])
        huu = (fu - 2.0 * f0) / step**2
        hvv = (fv - 2.0 * f0) / step**2
        huv = (fpp - fpm - fmp + fmm) / (4.0 * step**2)
        return np.array([[huu, huv], [huv, hvv]])

    h1 = entries(h)
    h2 = entries(h / 2.0)
    return (4.0 * h2 - h1) / 3.0, max(np.abs(h1).max(), np.abs(h2).max())


def field_derivatives(
    f: Callable,
    p,
    field: Callable,
    h: float,
    order: int,
    ref_direction=None,
) -> list[tuple[float, float]]:
    """Iterated derivatives of ``f`` along the unit vector field ``field``.

    ``field(q)`` returns the direction at ``q``; its sign is aligned with
    ``ref_direction`` (the direction at the base point by default) so the
    field is a continuous choice on the whole nested stencil.  Returns
    ``[(v f, scale), (v^2 f, scale), ...]`` up to ``order``.
    """
    p = np.asarray(p, dtype=float)
    if ref_direction is None:
        ref_direction = field(p)
    ref = np.asarray(ref_direction, dtype=float)

    def aligned(q):
        w = np.asarray(field(q), dtype=float)
        return w if float(np.dot(w, ref)) >= 0.0 else -w

    def make_level(fun):
        def deriv(q):
            q = np.asarray(q, dtype=float)
            w = aligned(q)

            def quot(step):
                return (fun(q + step * w) - fun(q - step * w)) / (2.0 * step)

            return _richardson(quot, h)

        return deriv

    out = []
    fun = lambda q: (f(q), 0.0)  # noqa: E731 - uniform (value, scale) shape
    for _ in range(order):
        level = make_level(lambda q, g=fun: g(q)[0])
        out.append(level(p))
        fun = level
    return out


def field_hessian(
    f: Callable, p, field_a: Callable, field_b: Callable, h: float
):
    """2x2 Hessian of ``f`` with respect to two vector fields, symmetrised."""

    def d_along(field):
        def deriv(q):
            w = np.asarray(field(q), dtype=float)

            def quot(step):
                return (f(np.asarray(q) + step * w) - f(np.asarray(q) - step * w)) / (
                    2.0 * step
                )

            return _richardson(quot, h)[0]

        return deriv

    da = d_along(field_a)
    db = d_along(field_b)

    def second(outer_field, inner):
        def quot(step):
            w = np.asarray(outer_field(p), dtype=float)
            return (inner(np.asarray(p) + step * w) - inner(np.asarray(p) - step * w)) / (
                2.0 * step
            )

        return _richardson(quot, h)

    (haa, s1) = second(field_a, da)
    (hab, s2) = second(field_a, db)
    (hba, s3) = second(field_b, da)
    (hbb, s4) = second(field_b, db)
    hmat = np.array([[haa, 0.5 * (hab + hba)], [0.5 * (hab + hba), hbb]])
    return hmat, max(s1, s2, s3, s4)


def jet_fd_oracle(surface, point, i: int, j: int, h: float | None = None):
    """Central-difference estimate of d^(i+j) g / du^i dv^j, Richardson once.

    Independent oracle for the exact jets.  The step defaults to 1e-4 for
    orders <= 2 and widens for higher orders where double precision
    cannot support a 1e-4 stencil.
    """
    order = i + j
    if h is None:
        h = {0: 1e-4, 1: 1e-4, 2: 1e-4, 3: 3e-3, 4: 1e-2, 5: 2.5e-2}[order]

    def value(q):
        stack = surface.jet_stack(np.asarray(q[0]), np.asarray(q[1]), 0)
        return np.asarray(stack[(0, 0)], dtype=float).reshape(3)

    def diff_axis(fun, axis, times, step):
        def inner(q):
            if times == 0:
                return fun(q)
            e = np.zeros(2)
            e[axis] = step
            prev = diff_axis(fun, axis, times - 1, step)
            return (prev(np.asarray(q) + e) - prev(np.asarray(q) - e)) / (2.0 * step)

        return inner

    def estimate(step):
        fun = diff_axis(value, 0, i, step)
        fun = diff_axis(fun, 1, j, step)
        return fun(np.asarray(point, dtype=float))

    d1 = estimate(h)
    d2 = estimate(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def default_step(*curvatures: float, base: float = 1e-3) -> float:
    """Stencil step: 1e-3 times the local feature scale 1/max(1, |kappa|)."""
    kmax = max([1.0] + [abs(k) for k in curvatures])
    return base / kmax
