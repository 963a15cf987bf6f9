"""Descriptors for the weight-estimation criteria and their parameters."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Regression:
    """Least squares of y on the candidate forecasts."""

    token = "reg"

    def describe(self) -> dict:
        return {"kind": "regression"}


@dataclass(frozen=True)
class GeneralizedMallows:
    """Penalized quadratic criterion; variant 'mallows' or 'kl'.

    The kl variant requires the correction vector phi; mallows treats it
    as zero.  sigma2 and the per-candidate trace vector k are supplied by
    the caller (see estimators.mallows_inputs for the standard recipe).
    """

    variant: str = "mallows"
    sigma2: float | None = None  # None: estimate from the panel at fit time
    phi: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.variant not in ("mallows", "kl"):
            raise ValueError(f"unknown Mallows variant {self.variant!r}")
        if self.sigma2 is not None and self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if self.variant == "kl" and self.phi is None:
            raise ValueError("kl variant requires phi")
        if self.variant == "mallows" and self.phi is not None:
            raise ValueError("mallows variant takes no phi")
        if self.phi is not None:
            object.__setattr__(self, "phi", tuple(float(v) for v in self.phi))

    @property
    def token(self) -> str:
        return "ma" if self.variant == "mallows" else "kl"

    def describe(self) -> dict:
        out = {"kind": "generalized_mallows", "variant": self.variant}
        if self.sigma2 is not None:
            out["sigma2"] = self.sigma2
        if self.phi is not None:
            out["phi"] = list(self.phi)
        return out


@dataclass(frozen=True)
class CrossValidation:
    """Leave-one-out CV criterion over the panel's loo forecasts."""

    token = "cv"

    def describe(self) -> dict:
        return {"kind": "cross_validation"}


@dataclass(frozen=True)
class Performance:
    """Individual performance-based weights (always land on the simplex).

    family: 'general' (a > 0, b >= 0, c <= 0), 'saic', 'sbic',
            'bates_granger', or 'inverse_loss' (with per-model losses).
    """

    family: str = "saic"
    a: float | None = None
    b: float | None = None
    c: float | None = None
    loss: tuple[float, ...] | None = None

    _FAMILIES = ("general", "saic", "sbic", "bates_granger", "inverse_loss")

    def __post_init__(self):
        if self.family not in self._FAMILIES:
            raise ValueError(f"unknown performance family {self.family!r}")
        if self.family == "general":
            if self.a is None or self.b is None or self.c is None:
                raise ValueError("general family requires a, b, c")
            if not (self.a > 0 and self.b >= 0 and self.c <= 0):
                raise ValueError("general family needs a > 0, b >= 0, c <= 0")
        if self.family == "inverse_loss":
            if self.loss is None:
                raise ValueError("inverse_loss family requires loss")
            loss = tuple(float(v) for v in self.loss)
            if any(v <= 0 for v in loss):
                raise ValueError("inverse_loss losses must be strictly positive")
            object.__setattr__(self, "loss", loss)

    @property
    def token(self) -> str:
        return {"general": "pf:gen", "saic": "pf:saic", "sbic": "pf:sbic",
                "bates_granger": "pf:bg", "inverse_loss": "pf:inv"}[self.family]

    def describe(self) -> dict:
        out = {"kind": "performance", "family": self.family}
        if self.family == "general":
            out.update(a=self.a, b=self.b, c=self.c)
        if self.loss is not None:
            out["loss"] = list(self.loss)
        return out


@dataclass(frozen=True)
class Eigenvector:
    """Smallest eigenvector of the forecast-error second-moment matrix."""

    token = "eig"

    def describe(self) -> dict:
        return {"kind": "eigenvector"}


@dataclass(frozen=True)
class SoftPenalized:
    """Soft-constraint penalties added to the squared loss (flavor c, d or e).

    flavor 'c': -mu'w - nu'(1-w); 'd': +lam*1'w - mu'w; 'e': +lam*w'w.
    """

    flavor: str = "e"
    lam: float = 0.0
    mu: tuple[float, ...] | None = None
    nu: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.flavor not in ("c", "d", "e"):
            raise ValueError(f"unknown soft-penalty flavor {self.flavor!r}")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        for name in ("mu", "nu"):
            v = getattr(self, name)
            if v is not None:
                v = tuple(float(x) for x in v)
                if any(x < 0 for x in v):
                    raise ValueError(f"{name} must be nonnegative elementwise")
                object.__setattr__(self, name, v)

    @property
    def token(self) -> str:
        return f"soft:{self.flavor}"

    def describe(self) -> dict:
        out = {"kind": "soft_penalized", "flavor": self.flavor, "lam": self.lam}
        if self.mu is not None:
            out["mu"] = list(self.mu)
        if self.nu is not None:
            out["nu"] = list(self.nu)
        return out


Method = Regression | GeneralizedMallows | CrossValidation | Performance | Eigenvector | SoftPenalized


def parse_method(token: str) -> Method:
    """Build a method descriptor from a CLI-style token.

    Accepted: reg, ma, kl, cv, eig, pf:saic, pf:sbic, pf:bg.
    (kl parses with phi = 0, which collapses to ma.)
    """
    t = token.strip().lower()
    if t == "reg":
        return Regression()
    if t == "ma":
        return GeneralizedMallows(variant="mallows")
    if t == "kl":
        return GeneralizedMallows(variant="mallows")  # phi = 0 collapse
    if t == "cv":
        return CrossValidation()
    if t == "eig":
        return Eigenvector()
    if t == "pf:saic":
        return Performance(family="saic")
    if t == "pf:sbic":
        return Performance(family="sbic")
    if t == "pf:bg":
        return Performance(family="bates_granger")
    raise ValueError(f"unknown method token {token!r}")
