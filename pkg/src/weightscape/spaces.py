"""The five weight spaces and their Euclidean geometry.

Spaces: A (all of R^S), Aprime (R^S, criterion carries a free intercept),
B (sum-to-one hyperplane), C (unit box [0,1]^S), D (probability simplex),
E (unit sphere).
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import DegenerateInputError

SUM_TOL = 1e-10
BOX_TOL = 1e-12
NORM_TOL = 1e-10


class WeightSpace(str, Enum):
    A = "A"
    APRIME = "Aprime"
    B = "B"
    C = "C"
    D = "D"
    E = "E"

    @classmethod
    def parse(cls, token: str) -> "WeightSpace":
        for member in cls:
            if member.value.lower() == token.strip().lower():
                return member
        raise ValueError(f"unknown weight space {token!r}; expected one of "
                         f"{[m.value for m in cls]}")


# Fixed ordering used for deterministic tie-breaking (conformal selection).
CANONICAL_ORDER = (
    WeightSpace.A,
    WeightSpace.B,
    WeightSpace.C,
    WeightSpace.D,
    WeightSpace.E,
    WeightSpace.APRIME,
)


def contains(w: np.ndarray, space: WeightSpace,
             sum_tol: float = SUM_TOL, box_tol: float = BOX_TOL,
             norm_tol: float = NORM_TOL) -> bool:
    """Feasibility predicate for a weight vector, at the package tolerances."""
    w = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w)):
        return False
    if space in (WeightSpace.A, WeightSpace.APRIME):
        return True
    if space is WeightSpace.B:
        return abs(w.sum() - 1.0) <= sum_tol
    if space is WeightSpace.C:
        return bool(np.all(w >= -box_tol) and np.all(w <= 1.0 + box_tol))
    if space is WeightSpace.D:
        return (abs(w.sum() - 1.0) <= sum_tol
                and bool(np.all(w >= -box_tol) and np.all(w <= 1.0 + box_tol)))
    if space is WeightSpace.E:
        return abs(w @ w - 1.0) <= norm_tol
    raise ValueError(f"unhandled space {space}")


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sorting-based threshold rule: components below the threshold come out
    exactly 0.0, which the active-set solver relies on for warm starts.
    """
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    rho = np.max(np.nonzero(u - (css - 1.0) / j > 0.0)[0]) + 1
    tau = (css[rho - 1] - 1.0) / rho
    return np.maximum(v - tau, 0.0)


def project(v: np.ndarray, space: WeightSpace) -> np.ndarray:
    """Euclidean-nearest feasible point of `space`.

    Raises DegenerateInputError for the zero vector on the sphere, where
    every unit vector is equidistant.
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise DegenerateInputError("cannot project a non-finite vector")
    if space in (WeightSpace.A, WeightSpace.APRIME):
        return v.copy()
    if space is WeightSpace.B:
        return v + (1.0 - v.sum()) / v.size
    if space is WeightSpace.C:
        return np.clip(v, 0.0, 1.0)
    if space is WeightSpace.D:
        return project_simplex(v)
    if space is WeightSpace.E:
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            raise DegenerateInputError(
                "projection of the zero vector onto the unit sphere is undefined")
        return v / nrm
    raise ValueError(f"unhandled space {space}")
