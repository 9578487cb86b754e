import numpy as np
import pytest

from cdeflow.base import PreconditionError, ValidationError
from cdeflow.potentials import CatastropheFamily, FamilyTag, TotalPoint
from cdeflow.strata import (
    CUSP,
    FOLD,
    SWALLOWTAIL_POINT,
    UMBILIC_POINT,
    StratumLabel,
    defining_residuals,
    parametrization_rank,
    sample_catastrophe_set,
    sample_stratum,
    stratum_dimension,
    stratum_of,
    supported_strata,
)

STRATIFIED = [
    FamilyTag.MORSE,
    FamilyTag.FOLD,
    FamilyTag.CUSP,
    FamilyTag.SWALLOWTAIL,
    FamilyTag.HYPERBOLIC_UMBILIC,
    FamilyTag.ELLIPTIC_UMBILIC,
]

CASES = [
    (tag, depth, label)
    for tag in STRATIFIED
    for depth, label in enumerate(supported_strata(CatastropheFamily(tag)), start=1)
]


@pytest.mark.parametrize("tag, depth, label", CASES, ids=lambda v: str(getattr(v, "value", v)))
def test_samples_land_on_their_stratum(tag, depth, label, rng):
    family = CatastropheFamily(tag)
    for point in sample_stratum(family, label, 100, rng):
        assert stratum_of(family, point) == label
        scale = 1.0 + float(np.max(np.abs(point.vector))) ** 2
        assert np.max(defining_residuals(family, point, depth)) <= 1e-8 * scale


@pytest.mark.parametrize("tag, depth, label", CASES, ids=lambda v: str(getattr(v, "value", v)))
def test_parametrizations_are_immersions(tag, depth, label, rng):
    family = CatastropheFamily(tag)
    assert parametrization_rank(family, label, rng) == stratum_dimension(family, label)


def test_dimensions_drop_by_one():
    swallowtail = CatastropheFamily(FamilyTag.SWALLOWTAIL)
    assert [stratum_dimension(swallowtail, s) for s in supported_strata(swallowtail)] == [3, 2, 1, 0]
    umbilic = CatastropheFamily(FamilyTag.HYPERBOLIC_UMBILIC)
    assert stratum_dimension(umbilic, UMBILIC_POINT) == 0
    with pytest.raises(ValidationError):
        stratum_dimension(CatastropheFamily(FamilyTag.CUSP), SWALLOWTAIL_POINT)


def test_point_strata_have_a_single_sample():
    swallowtail = CatastropheFamily(FamilyTag.SWALLOWTAIL)
    points = sample_stratum(swallowtail, SWALLOWTAIL_POINT, 5)
    assert len(points) == 1
    assert np.allclose(points[0].vector, 0.0)
    assert stratum_of(CatastropheFamily(FamilyTag.ELLIPTIC_UMBILIC), TotalPoint([0, 0], [0, 0, 0])) == UMBILIC_POINT


def test_cusp_origin_and_fold_points():
    cusp = CatastropheFamily(FamilyTag.CUSP)
    assert stratum_of(cusp, TotalPoint([0.0], [0.0, 0.0])) == CUSP
    x = 1 / np.sqrt(3)
    assert stratum_of(cusp, TotalPoint([x], [-1.0, -(x**3) + x])) == FOLD


def test_points_off_the_constraint_are_rejected():
    with pytest.raises(PreconditionError):
        stratum_of(CatastropheFamily(FamilyTag.CUSP), TotalPoint([1.0], [0.0, 0.0]))


def test_label_formatting_and_validation():
    assert str(FOLD) == "Sigma^1,1,0"
    assert FOLD.to_dict() == {"symbol": [1, 1, 0], "name": "fold"}
    with pytest.raises(ValidationError):
        StratumLabel((0, 1), "increasing")


def test_argument_validation():
    cusp = CatastropheFamily(FamilyTag.CUSP)
    with pytest.raises(ValidationError):
        supported_strata(CatastropheFamily(FamilyTag.BUTTERFLY))
    with pytest.raises(ValidationError):
        defining_residuals(cusp, TotalPoint([0.0], [0.0, 0.0]), 5)
    with pytest.raises(ValidationError):
        sample_stratum(cusp, FOLD, 0)


def test_catastrophe_set_table(rng):
    family = CatastropheFamily(FamilyTag.CUSP)
    frame = sample_catastrophe_set(family, 10, rng)
    assert list(frame.columns) == ["a", "b", "x", "stratum", "symbol"]
    # fold samples plus the single cusp point
    assert frame["stratum"].value_counts().to_dict() == {"fold": 10, "cusp": 1}
    folds = frame[frame["stratum"] == "fold"]
    assert np.allclose(4 * folds["a"] ** 3 + 27 * folds["b"] ** 2, 0.0, atol=1e-10)
