import numpy as np
import pytest

from cdeflow.base import JumpDomainError, PreconditionError, ValidationError
from cdeflow.jumps import (
    DescentSettings,
    LandingOutcome,
    cusp_jump_map,
    fast_descent,
    fibre_critical_points,
    perturb_off_singular,
    release_side,
    resolve_jump,
    sample_jump_queries,
    search_finite_jump,
    swallowtail_jump_domain,
    swallowtail_jump_map,
)
from cdeflow.potentials import (
    Attraction,
    CatastropheFamily,
    FamilyTag,
    TotalPoint,
    classify_membership,
    eval_potential,
    hessian_fast,
)

CUSP = CatastropheFamily(FamilyTag.CUSP)
SWALLOWTAIL = CatastropheFamily(FamilyTag.SWALLOWTAIL)


def cusp_fold_point(a: float, sign: float) -> TotalPoint:
    x = sign * np.sqrt(-a / 3.0)
    return TotalPoint([x], [a, -x**3 - a * x])


def swallowtail_b_point(x: float, a: float) -> TotalPoint:
    return TotalPoint([x], [a, -4 * x**3 - 2 * a * x, 3 * x**4 + a * x**2])


@pytest.mark.parametrize("a", [-1.0, -0.3, -2.5])
@pytest.mark.parametrize("sign", [-1.0, 1.0])
def test_cusp_map_matches_descent(a, sign):
    q = cusp_fold_point(a, sign)
    closed = cusp_jump_map(q)
    result = resolve_jump(CUSP, q)
    assert result.outcome is LandingOutcome.LANDED
    assert closed.fast[0] == pytest.approx(-2 * q.fast[0])
    assert result.landing.fast[0] == pytest.approx(closed.fast[0], abs=1e-7)
    assert np.array_equal(result.landing.slow, q.slow)
    assert result.potential_drop > 0


def test_dual_cusp_has_no_finite_jump():
    with pytest.raises(JumpDomainError):
        cusp_jump_map(cusp_fold_point(-1.0, 1.0), potential_sign=-1)


def test_jump_maps_require_a_singular_point():
    with pytest.raises(PreconditionError):
        cusp_jump_map(TotalPoint([1.0], [-1.0, 0.0]))
    with pytest.raises(PreconditionError):
        swallowtail_jump_map(TotalPoint([0.0], [-1.0, 0.0, 0.5]))


def test_swallowtail_map_examples():
    assert swallowtail_jump_map(swallowtail_b_point(0.0, -1.0)).fast[0] == pytest.approx(1.0)
    dual = swallowtail_jump_map(swallowtail_b_point(-0.5, -1.0), potential_sign=-1)
    assert dual.fast[0] == pytest.approx(0.5 - np.sqrt(0.5))


def test_swallowtail_domain():
    low, high, cusp = swallowtail_jump_domain(-1.0)
    assert (low, high, cusp) == pytest.approx((-np.sqrt(1 / 6), np.sqrt(0.5), np.sqrt(1 / 6)))
    assert swallowtail_jump_domain(-1.0, potential_sign=-1) == pytest.approx((-low, -high, -cusp))
    with pytest.raises(JumpDomainError):
        swallowtail_jump_domain(0.5)


def test_swallowtail_outside_domain_diverges():
    with pytest.raises(JumpDomainError):
        swallowtail_jump_map(swallowtail_b_point(-0.5, -1.0))
    q = swallowtail_b_point(-0.5, -1.0)
    assert resolve_jump(SWALLOWTAIL, q).outcome is LandingOutcome.DIVERGED


def test_swallowtail_cusp_point_is_excluded():
    with pytest.raises(JumpDomainError):
        swallowtail_jump_map(swallowtail_b_point(np.sqrt(1 / 6), -1.0))


def test_swallowtail_map_agrees_with_descent(rng):
    for q in sample_jump_queries(SWALLOWTAIL, 12, rng):
        closed = swallowtail_jump_map(q)
        result = resolve_jump(SWALLOWTAIL, q)
        assert result.landed
        assert result.landing.fast[0] == pytest.approx(closed.fast[0], abs=1e-7)


def test_search_finds_the_swallowtail_landing():
    q = swallowtail_b_point(0.0, -1.0)
    search = search_finite_jump(SWALLOWTAIL, q)
    assert len(search.admissible) == 1
    assert search.admissible[0].fast[0] == pytest.approx(1.0, abs=1e-8)
    roles = {round(float(c.point.fast[0]), 6): c.role for c in search.candidates}
    assert roles[0.0] == "query"
    assert roles[-1.0] == "outside_min"
    assert roles[1.0] == "admissible"
    assert search.to_dict()["admissible"]


def test_search_rejects_regular_points():
    with pytest.raises(PreconditionError):
        search_finite_jump(CUSP, TotalPoint([1.0], [-1.0, 0.0]))


def test_hyperbolic_umbilic_has_no_finite_jump(rng):
    family = CatastropheFamily(FamilyTag.HYPERBOLIC_UMBILIC)
    for q in sample_jump_queries(family, 5, rng):
        assert search_finite_jump(family, q).admissible == []


@pytest.mark.slow
@pytest.mark.parametrize("tag", [FamilyTag.HYPERBOLIC_UMBILIC, FamilyTag.ELLIPTIC_UMBILIC])
def test_umbilics_have_no_finite_jump_on_many_samples(tag, rng):
    family = CatastropheFamily(tag)
    total = sum(len(search_finite_jump(family, q).admissible) for q in sample_jump_queries(family, 200, rng))
    assert total == 0


def test_descent_decreases_potential():
    q = cusp_fold_point(-1.0, 1.0)
    start = perturb_off_singular(CUSP, q)
    result = fast_descent(CUSP, start)
    values = [eval_potential(CUSP, TotalPoint(z, q.slow)) for z in result.path_samples]
    assert np.all(np.diff(values) <= 1e-12)


def test_descent_from_a_minimum_stays_put():
    start = TotalPoint([1.0], [-1.0, 0.0])
    result = fast_descent(CUSP, start)
    assert result.landed
    assert result.potential_drop == 0.0
    assert result.landing.fast[0] == 1.0


def test_perturbation_points_toward_target():
    q = cusp_fold_point(-1.0, 1.0)
    shifted = perturb_off_singular(CUSP, q, toward=np.array([-2.0]), magnitude=1e-3)
    assert shifted.fast[0] == pytest.approx(q.fast[0] - 1e-3)


def test_fibre_critical_points():
    cusp_roots = fibre_critical_points(CUSP, np.array([-1.0, 0.0]))
    assert [float(r[0]) for r in cusp_roots] == pytest.approx([-1.0, 0.0, 1.0])
    umbilic = CatastropheFamily(FamilyTag.HYPERBOLIC_UMBILIC)
    roots = fibre_critical_points(umbilic, np.array([0.0, -3.0, -3.0]))
    assert sorted(tuple(np.round(r, 8)) for r in roots) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]


def test_sample_jump_queries_lie_on_the_singular_set(rng):
    for tag in (FamilyTag.CUSP, FamilyTag.SWALLOWTAIL, FamilyTag.ELLIPTIC_UMBILIC):
        family = CatastropheFamily(tag)
        for q in sample_jump_queries(family, 4, rng):
            membership = classify_membership(family, q, tol=1e-8)
            assert membership.on_constraint and membership.singular
    with pytest.raises(ValidationError):
        sample_jump_queries(CatastropheFamily(FamilyTag.MORSE), 1, rng)


def test_descent_settings_validation():
    with pytest.raises(ValidationError):
        DescentSettings(perturbation=0.0)


def assert_admissible_landing(family, q, result):
    assert result.landed, result.diagnostics
    membership = classify_membership(family, result.landing, tol=1e-8)
    assert membership.attracting is Attraction.INTERIOR
    values = [eval_potential(family, TotalPoint(z, q.slow)) for z in result.path_samples]
    assert np.all(np.diff(values) <= 1e-14)
    assert values[-1] < values[0]
    assert values[-1] < eval_potential(family, q)


@pytest.mark.parametrize("a", np.linspace(-1.5, -0.5, 11))
@pytest.mark.parametrize("sign", [-1.0, 1.0])
def test_cusp_release_side_moves_away_from_the_fold(a, sign):
    q = cusp_fold_point(a, sign)
    assert release_side(CUSP, q, np.array([1.0])) == -sign
    start = perturb_off_singular(CUSP, q)
    assert np.sign(start.fast[0] - q.fast[0]) == -sign
    assert_admissible_landing(CUSP, q, resolve_jump(CUSP, q))


def test_release_side_along_a_two_dimensional_kernel():
    family = CatastropheFamily(FamilyTag.HYPERBOLIC_UMBILIC)
    q = TotalPoint([0.5, 0.0], [0.0, -0.75, 0.0])
    eigenvalues, vectors = np.linalg.eigh(hessian_fast(family, q))
    assert eigenvalues == pytest.approx([0.0, 3.0])
    direction = vectors[:, 0]
    side = release_side(family, q, direction)
    assert side in (-1.0, 1.0)
    assert release_side(family, q, -direction) == -side


@pytest.mark.slow
@pytest.mark.parametrize("tag", [FamilyTag.CUSP, FamilyTag.SWALLOWTAIL])
def test_descent_and_closed_form_agree_on_many_samples(tag):
    family = CatastropheFamily(tag)
    closed_form = cusp_jump_map if tag is FamilyTag.CUSP else swallowtail_jump_map
    queries = sample_jump_queries(family, 200, np.random.default_rng(42))
    for q in queries:
        closed = closed_form(q)
        result = resolve_jump(family, q)
        assert_admissible_landing(family, q, result)
        assert abs(result.landing.fast[0] - closed.fast[0]) <= 1e-8
        if tag is FamilyTag.SWALLOWTAIL:
            search = search_finite_jump(family, q)
            assert len(search.admissible) == 1
            assert abs(search.admissible[0].fast[0] - closed.fast[0]) <= 1e-8
