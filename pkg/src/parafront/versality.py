"""K-versality of the distance-squared unfoldings by jet-space spanning.

An unfolding is K-versal iff the unfolding derivative rows together with
the truncated ideal generated by (phi, phi_u, phi_v) span the full jet
space of the germ's determinacy degree.  The spanning test is a rank
computation over the monomial basis; no chart change is performed (the
condition is coordinate-invariant).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from .errors import UnsupportedGermError
from .germ import DETERMINACY, GermClass, GermJet, classify_germ
from .polyjet import Poly2

RANK_TAU = 1e-9

FAMILIES = ("phi_t", "phi")


def _monomials(deg: int) -> List[Tuple[int, int]]:
    return [(i, n - i) for n in range(deg + 1) for i in range(n, -1, -1)]


@dataclass(frozen=True)
class VersalityProblem:
    family: str
    degree: int
    monomials: Tuple[Tuple[int, int], ...]
    matrix: np.ndarray
    row_labels: Tuple[str, ...]


@dataclass(frozen=True)
class VersalityVerdict:
    versal: bool
    rank: int
    required: int
    missing: Tuple[Tuple[int, int], ...]


def build_versality_matrix(
    germ: GermJet, family: str, germ_class: Optional[GermClass] = None
) -> VersalityProblem:
    """Rows: unfolding derivatives at q, then the truncated ideal generators.

    For family ``phi_t`` the unfolding moves in (x, y, z) only; family
    ``phi`` adds the t direction.  Ideal rows are m * phi_u, m * phi_v and
    m * phi for all monomials m that can contribute below the truncation
    degree d; columns are the plain coefficients of the monomials of total
    degree <= d.
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    gclass = germ_class or classify_germ(germ)
    if gclass.label not in DETERMINACY:
        raise UnsupportedGermError(
            f"germ class {gclass.label} has no supported determinacy degree"
        )
    d = DETERMINACY[gclass.label]
    mons = _monomials(d)

    def coeff_row(poly: Poly2) -> np.ndarray:
        return np.array([poly.coeff(i, j) for (i, j) in mons])

    rows = []
    labels = []
    unfold = [("phi_x", germ.phi_x), ("phi_y", germ.phi_y), ("phi_z", germ.phi_z)]
    if family == "phi":
        unfold.append(("phi_t", germ.phi_t))
    for name, poly in unfold:
        rows.append(coeff_row(poly))
        labels.append(name)

    phi = germ.phi
    phi_u = phi.partial(1, 0)
    phi_v = phi.partial(0, 1)
    for gen_name, gen, max_m in (
        ("phi_u", phi_u, d - 1),
        ("phi_v", phi_v, d - 1),
        ("phi", phi, d - 2),
    ):
        for a, b in _monomials(max(max_m, 0)):
            mono = Poly2.monomial(a, b, 1.0, phi.deg)
            rows.append(coeff_row(mono * gen))
            labels.append(f"u^{a} v^{b} * {gen_name}" if a + b else gen_name)

    return VersalityProblem(
        family=family,
        degree=d,
        monomials=tuple(mons),
        matrix=np.array(rows),
        row_labels=tuple(labels),
    )


def is_K_versal(problem: VersalityProblem) -> VersalityVerdict:
    """Full-column-rank test by column-pivoted elimination."""
    a = problem.matrix
    required = len(problem.monomials)
    norm = np.linalg.norm(a)
    _, r, _ = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > RANK_TAU * max(norm, 1.0)))
    missing: Tuple[Tuple[int, int], ...] = ()
    if rank < required:
        # monomial directions with a large component outside the row space
        _, s, vt = np.linalg.svd(a)
        null = vt[rank:]
        resid = np.linalg.norm(null, axis=0)
        missing = tuple(
            mon for mon, res in zip(problem.monomials, resid) if res > 0.5
        )
    return VersalityVerdict(
        versal=rank == required, rank=rank, required=required, missing=missing
    )


def versality_verdicts(germ: GermJet, germ_class: Optional[GermClass] = None):
    """Verdicts for both families; None when the class is unsupported."""
    gclass = germ_class or classify_germ(germ)
    if gclass.label not in DETERMINACY:
        return {"phi_t": None, "phi": None}
    return {
        fam: is_K_versal(build_versality_matrix(germ, fam, gclass))
        for fam in FAMILIES
    }
