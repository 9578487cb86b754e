import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdeflow.base import ChartError, DimensionError, ValidationError
from cdeflow.potentials import (
    Attraction,
    CatastropheFamily,
    ChartPoint,
    FamilyTag,
    TotalPoint,
    chart_of,
    classify_membership,
    eval_potential,
    fast_derivative,
    grad_fast,
    hessian_fast,
    lift_to_constraint,
    symbolic_potential,
    third_derivative_tensor,
)
from tests.conftest import CRITICAL_FAMILIES

coordinate = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def _point(family: CatastropheFamily, values) -> TotalPoint:
    n = family.fast_dim
    return TotalPoint(values[:n], values[n : n + family.slow_dim])


def test_hyperbolic_umbilic_value():
    family = CatastropheFamily(FamilyTag.HYPERBOLIC_UMBILIC)
    assert eval_potential(family, TotalPoint([1, 1], [1, 1, 1])) == pytest.approx(5.0)


def test_cusp_value_and_dual_sign():
    cusp = CatastropheFamily(FamilyTag.CUSP)
    dual = CatastropheFamily(FamilyTag.CUSP, sign=-1)
    p = TotalPoint([1.0], [-2.0, 0.5])
    # 1/4 - 1 + 1/2
    assert eval_potential(cusp, p) == pytest.approx(-0.25)
    assert eval_potential(dual, p) == pytest.approx(0.25)
    assert grad_fast(dual, p) == pytest.approx(-grad_fast(cusp, p))


@pytest.mark.parametrize("tag", CRITICAL_FAMILIES)
@settings(deadline=None, max_examples=60)
@given(values=st.lists(coordinate, min_size=6, max_size=6))
def test_gradient_and_hessian_match_finite_differences(tag, values):
    family = CatastropheFamily(tag)
    p = _point(family, values)
    h = 1e-6
    grad = grad_fast(family, p)
    hess = hessian_fast(family, p)
    for i in range(family.fast_dim):
        step = np.zeros(family.fast_dim)
        step[i] = h
        plus, minus = p.with_fast(p.fast + step), p.with_fast(p.fast - step)
        fd_grad = (eval_potential(family, plus) - eval_potential(family, minus)) / (2 * h)
        assert abs(fd_grad - grad[i]) <= 1e-6 * (1 + np.max(np.abs(grad)))
        fd_hess = (grad_fast(family, plus) - grad_fast(family, minus)) / (2 * h)
        assert np.max(np.abs(fd_hess - hess[:, i])) <= 1e-6 * (1 + np.max(np.abs(hess)))


@pytest.mark.parametrize("tag", [FamilyTag.ELLIPTIC_UMBILIC, FamilyTag.HYPERBOLIC_UMBILIC, FamilyTag.PARABOLIC_UMBILIC])
def test_third_derivative_is_symmetric(tag, rng):
    family = CatastropheFamily(tag)
    p = TotalPoint(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, family.slow_dim))
    tensor = third_derivative_tensor(family, p)
    assert np.allclose(tensor, np.transpose(tensor, (1, 0, 2)))
    assert np.allclose(tensor, np.transpose(tensor, (0, 2, 1)))


def test_fast_derivative_orders_for_swallowtail():
    family = CatastropheFamily(FamilyTag.SWALLOWTAIL)
    p = TotalPoint([0.0], [0.0, 0.0, 0.0])
    assert [fast_derivative(family, p, k) for k in range(1, 5)] == [0.0, 0.0, 0.0, 0.0]
    assert fast_derivative(family, p, 5) == pytest.approx(24.0)


def test_fast_derivative_rejects_two_fast_variables():
    family = CatastropheFamily(FamilyTag.ELLIPTIC_UMBILIC)
    with pytest.raises(DimensionError):
        fast_derivative(family, TotalPoint([0, 0], [0, 0, 0]), 2)


def test_cusp_fold_points_are_singular_and_boundary():
    family = CatastropheFamily(FamilyTag.CUSP)
    for x in (1 / np.sqrt(3), -1 / np.sqrt(3)):
        b = -(x**3) + x
        membership = classify_membership(family, TotalPoint([x], [-1.0, b]))
        assert membership.on_constraint
        assert membership.singular
        assert membership.attracting is Attraction.BOUNDARY
        assert abs(b) == pytest.approx(2 / (3 * np.sqrt(3)), abs=1e-12)


def test_swallowtail_origin_slice_is_singular():
    family = CatastropheFamily(FamilyTag.SWALLOWTAIL)
    membership = classify_membership(family, TotalPoint([0.0], [-1.0, 0.0, 0.0]))
    assert membership.on_constraint and membership.singular
    assert membership.attracting is Attraction.BOUNDARY


def test_membership_outside_and_interior():
    family = CatastropheFamily(FamilyTag.CUSP)
    assert classify_membership(family, TotalPoint([0.0], [-1.0, 0.0])).attracting is Attraction.OUTSIDE
    assert classify_membership(family, TotalPoint([1.0], [-1.0, 0.0])).attracting is Attraction.INTERIOR
    off = classify_membership(family, TotalPoint([1.0], [-1.0, 0.3]))
    assert not off.on_constraint and off.attracting is Attraction.OUTSIDE


def test_membership_rejects_non_positive_tolerance():
    family = CatastropheFamily(FamilyTag.FOLD)
    with pytest.raises(ValidationError):
        classify_membership(family, TotalPoint([0.0], [0.0]), tol=0.0)


@pytest.mark.parametrize("tag", CRITICAL_FAMILIES)
@settings(deadline=None, max_examples=30)
@given(values=st.lists(coordinate, min_size=4, max_size=4))
def test_lift_lands_on_constraint_and_inverts_chart(tag, values):
    family = CatastropheFamily(tag)
    chart = ChartPoint(family, values[: len(family.chart_names)])
    point = lift_to_constraint(family, chart)
    assert np.max(np.abs(grad_fast(family, point))) <= 1e-9 * (1 + np.max(np.abs(point.vector)) ** 3)
    assert np.array_equal(chart_of(family, point).coords, chart.coords)


def test_lift_for_hyperbolic_umbilic():
    family = CatastropheFamily(FamilyTag.HYPERBOLIC_UMBILIC)
    point = lift_to_constraint(family, ChartPoint.from_mapping(family, {"a": 1.0, "x": 2.0, "y": 3.0}))
    assert point.slow.tolist() == [1.0, -12.0 - 3.0, -27.0 - 2.0]


def test_chart_names():
    assert CatastropheFamily(FamilyTag.CUSP).chart_names == ("x", "a")
    assert CatastropheFamily(FamilyTag.CUSP, slow_dim=3).chart_names == ("x", "a", "c")
    assert CatastropheFamily(FamilyTag.FOLD, slow_dim=3).chart_names == ("x", "b", "c")
    assert CatastropheFamily(FamilyTag.SWALLOWTAIL).chart_names == ("a", "b", "x")
    assert CatastropheFamily(FamilyTag.ELLIPTIC_UMBILIC).chart_names == ("a", "x", "y")


def test_non_critical_has_no_chart():
    family = CatastropheFamily(FamilyTag.NON_CRITICAL)
    with pytest.raises(ChartError):
        family.chart_names
    assert not family.supports_dynamics


def test_dimension_checks():
    with pytest.raises(DimensionError):
        CatastropheFamily(FamilyTag.FOLD, slow_dim=4)
    family = CatastropheFamily(FamilyTag.CUSP)
    with pytest.raises(DimensionError):
        grad_fast(family, TotalPoint([0.0, 1.0], [0.0, 0.0]))
    with pytest.raises(DimensionError):
        ChartPoint(family, [1.0, 2.0, 3.0])


def test_from_name():
    assert CatastropheFamily.from_name(" Swallowtail ").tag is FamilyTag.SWALLOWTAIL
    with pytest.raises(ValidationError, match="famille inconnue"):
        CatastropheFamily.from_name("wigwam")


def test_symbolic_potential_matches_numeric(rng):
    family = CatastropheFamily(FamilyTag.ELLIPTIC_UMBILIC)
    expr = symbolic_potential(family)
    p = TotalPoint(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 3))
    substitution = {s: p.as_dict(family)[s.name] for s in expr.free_symbols}
    assert float(expr.subs(substitution)) == pytest.approx(eval_potential(family, p), rel=1e-12)
