import numpy as np
import pytest

from weightscape import (GeneralizedMallows, Performance, SoftPenalized,
                         WeightSpace, parse_method)
from weightscape.methods import CrossValidation, Eigenvector, Regression


def test_parse_method_tokens():
    assert isinstance(parse_method("reg"), Regression)
    assert parse_method("ma").variant == "mallows"
    assert parse_method("kl").variant == "mallows"  # phi=0 collapse
    assert isinstance(parse_method("cv"), CrossValidation)
    assert isinstance(parse_method("eig"), Eigenvector)
    assert parse_method("pf:saic").family == "saic"
    assert parse_method("pf:sbic").family == "sbic"
    assert parse_method("pf:bg").family == "bates_granger"
    with pytest.raises(ValueError, match="unknown method"):
        parse_method("nope")


def test_generalized_mallows_validation():
    with pytest.raises(ValueError, match="variant"):
        GeneralizedMallows(variant="other")
    with pytest.raises(ValueError, match="nonnegative"):
        GeneralizedMallows(sigma2=-1.0)
    with pytest.raises(ValueError, match="requires phi"):
        GeneralizedMallows(variant="kl")
    with pytest.raises(ValueError, match="no phi"):
        GeneralizedMallows(variant="mallows", phi=(0.0,))
    desc = GeneralizedMallows(variant="kl", phi=(0.5, 0.25)).describe()
    assert desc["variant"] == "kl"
    assert desc["phi"] == [0.5, 0.25]


def test_performance_validation():
    with pytest.raises(ValueError, match="family"):
        Performance(family="rank")
    with pytest.raises(ValueError, match="requires a, b, c"):
        Performance(family="general", a=1.0)
    with pytest.raises(ValueError, match="a > 0"):
        Performance(family="general", a=-1.0, b=0.0, c=0.0)
    with pytest.raises(ValueError, match="requires loss"):
        Performance(family="inverse_loss")
    spec = Performance(family="general", a=0.5, b=1.0, c=-2.0)
    assert spec.token == "pf:gen"
    assert spec.describe()["a"] == 0.5


def test_soft_penalized_validation():
    with pytest.raises(ValueError, match="flavor"):
        SoftPenalized(flavor="x")
    with pytest.raises(ValueError, match="lam"):
        SoftPenalized(flavor="e", lam=-0.5)
    with pytest.raises(ValueError, match="mu"):
        SoftPenalized(flavor="c", mu=(-0.1,))
    spec = SoftPenalized(flavor="d", lam=2.0, mu=(0.1, 0.2))
    assert spec.token == "soft:d"
    assert spec.describe()["mu"] == [0.1, 0.2]


def test_space_parse():
    assert WeightSpace.parse("aprime") is WeightSpace.APRIME
    assert WeightSpace.parse(" D ") is WeightSpace.D
    with pytest.raises(ValueError, match="unknown weight space"):
        WeightSpace.parse("F")


def test_method_tokens_round_trip():
    for token in ("reg", "cv", "eig", "pf:saic", "pf:sbic", "pf:bg"):
        assert parse_method(token).token == token
