"""Weight solutions and diagnostics records, plus their JSON envelope."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spaces import WeightSpace, contains

ZERO_TOL = 1e-8  # |w_s| <= ZERO_TOL counts as a zero weight in sparsity metrics


@dataclass(frozen=True)
class Multipliers:
    """Lagrange multipliers attached to a solution.

    rho0 : sum-to-one multiplier, in the closed-form convention
           w = -H^{-1}(g + rho0 * 1) of the equality-constrained solve
    nu   : unit-norm multiplier (the root below lambda_min)
    box  : non-negativity multipliers of the box/simplex solve
    box_upper : multipliers of the w <= 1 bounds (box space only)
    """

    rho0: float | None = None
    nu: float | None = None
    box: tuple[float, ...] | None = None
    box_upper: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        out: dict = {}
        if self.rho0 is not None:
            out["rho0"] = float(self.rho0)
        if self.nu is not None:
            out["nu"] = float(self.nu)
        if self.box is not None:
            out["box"] = [float(v) for v in self.box]
        if self.box_upper is not None:
            out["box_upper"] = [float(v) for v in self.box_upper]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Multipliers":
        return cls(
            rho0=d.get("rho0"),
            nu=d.get("nu"),
            box=tuple(d["box"]) if d.get("box") is not None else None,
            box_upper=tuple(d["box_upper"]) if d.get("box_upper") is not None else None,
        )


@dataclass(frozen=True)
class WeightSolution:
    """An estimated weight vector plus everything needed to audit it."""

    w: np.ndarray
    space: WeightSpace
    method: dict
    intercept: float | None = None
    multipliers: Multipliers = field(default_factory=Multipliers)
    active_set: tuple[int, ...] = ()
    converged: bool = True
    unique_certified: bool | None = None

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "active_set", tuple(int(i) for i in self.active_set))

    @property
    def n_candidates(self) -> int:
        return self.w.size

    def feasible(self) -> bool:
        return contains(self.w, self.space)

    def predict(self, F: np.ndarray) -> np.ndarray:
        """Combined forecast for each row of F."""
        yhat = np.asarray(F, dtype=float) @ self.w
        if self.intercept is not None:
            yhat = yhat + self.intercept
        return yhat

    def sparsity_pct(self, zero_tol: float = ZERO_TOL) -> float:
        return 100.0 * float(np.mean(np.abs(self.w) <= zero_tol))

    def to_dict(self) -> dict:
        return {
            "weights": [float(v) for v in self.w],
            "intercept": None if self.intercept is None else float(self.intercept),
            "multipliers": self.multipliers.to_dict(),
            "active_set": list(self.active_set),
            "space": self.space.value,
            "method": self.method,
            "converged": bool(self.converged),
            "unique_certified": self.unique_certified,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSolution":
        return cls(
            w=np.array(d["weights"], dtype=float),
            space=WeightSpace.parse(d["space"]),
            method=dict(d["method"]),
            intercept=d.get("intercept"),
            multipliers=Multipliers.from_dict(d.get("multipliers", {})),
            active_set=tuple(d.get("active_set", ())),
            converged=bool(d.get("converged", True)),
            unique_certified=d.get("unique_certified"),
        )


@dataclass(frozen=True)
class DiagnosticsReport:
    """Evaluation summary for one solution on one panel."""

    ssr: float
    empirical_bias: float
    sparsity_pct: float
    error_acf: tuple[float, ...] = ()
    msfe: float | None = None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "ssr": float(self.ssr),
            "empirical_bias": float(self.empirical_bias),
            "msfe": None if self.msfe is None else float(self.msfe),
            "sparsity_pct": float(self.sparsity_pct),
            "error_acf": [float(v) for v in self.error_acf],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiagnosticsReport":
        return cls(
            ssr=d["ssr"],
            empirical_bias=d["empirical_bias"],
            sparsity_pct=d["sparsity_pct"],
            error_acf=tuple(d.get("error_acf", ())),
            msfe=d.get("msfe"),
            notes=tuple(d.get("notes", ())),
        )
