"""Distance-squared germs at focal points and A_k / D4 recognition.

The germ phi is the augmented distance-squared function restricted to
the focal point of one curvature sheet, expanded in the Monge chart.
Recognition of A1..A4 and D4+- runs entirely on the degree-5 Taylor
coefficients c_ij, through the kernel direction of the quadratic part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import NoFocalPointError, NotSingularPointError, NumericalQualityError
from .monge import MongeJet
from .numdiff import ZERO_TAU, is_zero
from .polyjet import Poly2, rotate

GERM_DEG = 5

#: determinacy degree of each recognised class
DETERMINACY = {"A2": 3, "A3": 4, "A4": 5, "D4Plus": 3, "D4Minus": 3}


@dataclass(frozen=True)
class GermJet:
    """Taylor data of phi at a focal point plus its unfolding derivatives.

    ``phi`` carries the c_ij as plain coefficients (c_ij = i! j! *
    phi.coeff(i, j)); ``khat1``/``khat2`` are the quadratic eigenvalues
    k_i z0 - 1, with the focal sheet's one vanishing by construction.
    The rows phi_x .. phi_t are the unfolding derivatives restricted to
    the evaluation point q = (0, 0, z0) (and t0 = z0), as polynomials in
    the surface parameters.
    """

    phi: Poly2
    z0: float
    t0: float
    khat1: float
    khat2: float
    sheet: int
    q: Tuple[float, float, float]
    phi_x: Poly2
    phi_y: Poly2
    phi_z: Poly2
    phi_t: Poly2

    def c(self, i: int, j: int) -> float:
        return self.phi.taylor_coeff(i, j)


def germ_from_surface(monge: MongeJet, sheet: int) -> GermJet:
    """Build the germ of the distance-squared unfolding at the focal point.

    The focal point of sheet i sits at g(p) + n(p)/kappa_i, which is
    (0, 0, z0) with z0 = 1/k_i in the Monge frame; phi(u, v) =
    -(u^2 + v^2 + (z0 - f)^2 - z0^2)/2 expanded to degree five.
    """
    if sheet not in (1, 2):
        raise ValueError("sheet must be 1 or 2")
    k = monge.k1 if sheet == 1 else monge.k2
    if abs(k) < 1e-12:
        raise NoFocalPointError(
            f"no focal point (kappa{sheet} = 0): parabolic sheet"
        )
    z0 = 1.0 / k
    f = monge.height
    u, v = Poly2.variables(GERM_DEG)
    dz = z0 - f
    phi = -0.5 * (u * u + v * v + dz * dz - z0 * z0)
    return GermJet(
        phi=phi,
        z0=z0,
        t0=z0,
        khat1=monge.k1 * z0 - 1.0,
        khat2=monge.k2 * z0 - 1.0,
        sheet=sheet,
        q=(0.0, 0.0, z0),
        phi_x=u,
        phi_y=v,
        phi_z=f - z0,
        phi_t=Poly2.constant(z0, GERM_DEG),
    )


def rotate_germ(germ: GermJet, theta: float) -> GermJet:
    """Precompose the germ and its unfolding rows with a chart rotation."""
    return GermJet(
        phi=rotate(germ.phi, theta),
        z0=germ.z0,
        t0=germ.t0,
        khat1=germ.khat1,
        khat2=germ.khat2,
        sheet=germ.sheet,
        q=germ.q,
        phi_x=rotate(germ.phi_x, theta),
        phi_y=rotate(germ.phi_y, theta),
        phi_z=rotate(germ.phi_z, theta),
        phi_t=germ.phi_t,
    )


def germ_from_coeffs(c: Dict[Tuple[int, int], float]) -> Poly2:
    """Taylor polynomial from derivative-normalised coefficients c_ij."""
    return Poly2.from_taylor(c, GERM_DEG)


# ---------------------------------------------------------------------------
# kernel of the quadratic part


@dataclass(frozen=True)
class KernelData:
    """Kernel direction (lam, mu) and scale s of a rank-1 quadratic part.

    Satisfies [[c20, c11], [c11, c02]] = s [[mu^2, -lam mu], [-lam mu, lam^2]]
    with (lam, mu) unit and its first nonzero component positive.
    """

    lam: float
    mu: float
    s: float


def _hessian_matrix(phi: Poly2) -> np.ndarray:
    return np.array(
        [
            [phi.taylor_coeff(2, 0), phi.taylor_coeff(1, 1)],
            [phi.taylor_coeff(1, 1), phi.taylor_coeff(0, 2)],
        ]
    )


def _hessian_rank(h: np.ndarray) -> int:
    scale = max(1.0, np.abs(h).max())
    eigs = np.linalg.eigvalsh(h)
    return int(np.sum(np.abs(eigs) > ZERO_TAU * scale))


def hessian_kernel(phi_or_matrix) -> KernelData:
    """Kernel data of a rank-1 quadratic part, per the rank-1 factorisation."""
    h = (
        _hessian_matrix(phi_or_matrix)
        if isinstance(phi_or_matrix, Poly2)
        else np.asarray(phi_or_matrix, dtype=float)
    )
    rank = _hessian_rank(h)
    if rank != 1:
        raise NumericalQualityError(f"Hessian rank is {rank}, expected 1")
    eigs, vecs = np.linalg.eigh(h)
    k = int(np.argmin(np.abs(eigs)))
    kern = vecs[:, k]
    for comp in kern:
        if abs(comp) > 1e-12:
            kern = kern if comp > 0 else -kern
            break
    lam, mu = float(kern[0]), float(kern[1])
    s = float(h[0, 0] + h[1, 1])  # trace = s (lam^2 + mu^2) with unit kernel
    model = s * np.array([[mu**2, -lam * mu], [-lam * mu, lam**2]])
    resid = np.abs(h - model).max()
    if resid > 1e-10 * max(1.0, np.abs(h).max()):
        raise NumericalQualityError(
            f"rank-1 factorisation residual {resid:.2e} too large"
        )
    return KernelData(lam=lam, mu=mu, s=s)


# ---------------------------------------------------------------------------
# homogeneous-part evaluations


def _cn(phi: Poly2, n: int, du: int, dv: int, lam: float, mu: float):
    """(value, scale) of the (du, dv) partial of c_n at (lam, mu).

    c_n(u, v) = sum_{i+j=n} c_ij u^i v^j / (i! j!); the scale is the sum
    of the term magnitudes, feeding the relative zero test.
    """
    part = phi.homogeneous(n).partial(du, dv)
    val = 0.0
    mag = 0.0
    for i in range(part.deg + 1):
        for j in range(part.deg + 1 - i):
            cf = part.coeff(i, j)
            if cf != 0.0:
                term = cf * lam**i * mu**j
                val += term
                mag += abs(term)
    return val, mag


@dataclass(frozen=True)
class GermClass:
    """Recognised singularity class of a germ with its decision witnesses."""

    label: str
    kernel: Optional[KernelData] = None
    witnesses: Dict[str, float] = field(default_factory=dict)

    @property
    def determinacy(self) -> int:
        return DETERMINACY.get(self.label, 0)


def d4_determinant(c30: float, c21: float, c12: float, c03: float):
    m = np.array(
        [
            [c30, 2 * c21, c12, 0.0],
            [0.0, c30, 2 * c21, c12],
            [c21, 2 * c12, c03, 0.0],
            [0.0, c21, 2 * c12, c03],
        ]
    )
    det = float(np.linalg.det(m))
    # product of row sums bounds the expansion terms; serves as zero-test scale
    scale = float(np.prod(np.abs(m).sum(axis=1)))
    return det, scale


def a4_branch(phi: Poly2, kern: KernelData, use_lam: bool):
    """Theorem-4.1(3) quintic expression along one elimination branch."""
    lam, mu = kern.lam, kern.mu
    s = kern.s
    c5, m5 = _cn(phi, 5, 0, 0, lam, mu)
    if use_lam:
        c4d, m4 = _cn(phi, 4, 0, 1, lam, mu)
        c3d, m3 = _cn(phi, 3, 0, 1, lam, mu)
        c3dd, m3b = _cn(phi, 3, 0, 2, lam, mu)
        denom = s * lam**2
        denom2 = 2.0 * s**2 * lam**4
    else:
        c4d, m4 = _cn(phi, 4, 1, 0, lam, mu)
        c3d, m3 = _cn(phi, 3, 1, 0, lam, mu)
        c3dd, m3b = _cn(phi, 3, 2, 0, lam, mu)
        denom = s * mu**2
        denom2 = 2.0 * s**2 * mu**4
    val = c5 - c4d * c3d / denom + c3d**2 * c3dd / denom2
    scale = m5 + abs(c4d * c3d / denom) + abs(c3d**2 * c3dd / denom2)
    return val, scale


def classify_germ(phi_or_germ) -> GermClass:
    """Recognise A1..A4 / D4+- from the degree-5 Taylor coefficients.

    Everything beyond the table (A5 or worse, D5 or worse, decisions that
    would need order-6 data) is labelled ``Worse``.
    """
    phi = phi_or_germ.phi if isinstance(phi_or_germ, GermJet) else phi_or_germ
    lin = max(abs(phi.taylor_coeff(1, 0)), abs(phi.taylor_coeff(0, 1)))
    if lin > ZERO_TAU * max(1.0, abs(phi.taylor_coeff(2, 0)), abs(phi.taylor_coeff(0, 2))):
        raise NotSingularPointError(
            f"germ has nonzero linear part ({lin:.2e}); not a singularity"
        )
    h = _hessian_matrix(phi)
    rank = _hessian_rank(h)
    if rank == 2:
        return GermClass(label="A1", witnesses={"hessian_det": float(np.linalg.det(h))})

    if rank == 0:
        det, scale = d4_determinant(
            phi.taylor_coeff(3, 0),
            phi.taylor_coeff(2, 1),
            phi.taylor_coeff(1, 2),
            phi.taylor_coeff(0, 3),
        )
        wit = {"d4_determinant": det}
        if is_zero(det, scale):
            return GermClass(label="Worse", witnesses=wit)
        return GermClass(label="D4Plus" if det > 0 else "D4Minus", witnesses=wit)

    kern = hessian_kernel(h)
    lam, mu = kern.lam, kern.mu
    c3, m3 = _cn(phi, 3, 0, 0, lam, mu)
    wit = {"c3": c3}
    if not is_zero(c3, m3):
        return GermClass(label="A2", kernel=kern, witnesses=wit)

    det3 = float(
        np.linalg.det(
            np.array(
                [
                    [mu**2, -lam * mu, lam**2],
                    [phi.taylor_coeff(3, 0), phi.taylor_coeff(2, 1), phi.taylor_coeff(1, 2)],
                    [phi.taylor_coeff(2, 1), phi.taylor_coeff(1, 2), phi.taylor_coeff(0, 3)],
                ]
            )
        )
    )
    c4, m4 = _cn(phi, 4, 0, 0, lam, mu)
    c4hat = c4 + det3 / (8.0 * kern.s)
    m4hat = m4 + abs(det3 / (8.0 * kern.s))
    wit["c4hat"] = c4hat
    if not is_zero(c4hat, m4hat):
        return GermClass(label="A3", kernel=kern, witnesses=wit)

    # A4: evaluate the better-conditioned branch; both agree when both apply
    use_lam = abs(lam) >= abs(mu)
    q, mq = a4_branch(phi, kern, use_lam)
    wit["a4_quintic"] = q
    if not is_zero(q, mq):
        return GermClass(label="A4", kernel=kern, witnesses=wit)
    return GermClass(label="Worse", kernel=kern, witnesses=wit)
