import numpy as np
import pytest

from cdeflow.base import DimensionError, ValidationError
from cdeflow.desingularization import (
    CdeSpec,
    PolynomialMap,
    adjugate,
    desingularized_field_closed,
    desingularized_field_generic,
    jacobian_projection,
    projection_determinant,
    projection_restricted,
    pushforward_residual,
)
from cdeflow.potentials import CatastropheFamily, ChartPoint, FamilyTag
from tests.conftest import CODIM_THREE, random_linear_spec


def _det(tag, values, slow_dim=None):
    family = CatastropheFamily(tag, slow_dim)
    return projection_determinant(family, ChartPoint.from_mapping(family, values))


def test_projection_determinants():
    assert _det(FamilyTag.FOLD, {"x": 0.7}) == pytest.approx(-1.4)
    assert _det(FamilyTag.FOLD, {"x": -0.5, "b": 0.3, "c": 2.0}, slow_dim=3) == pytest.approx(1.0)
    assert _det(FamilyTag.CUSP, {"x": 0.5, "a": -1.0}) == pytest.approx(-0.25)
    x, a, b = 0.3, -0.8, 0.2
    assert _det(FamilyTag.SWALLOWTAIL, {"a": a, "b": b, "x": x}) == pytest.approx(-(4 * x**3 + 2 * a * x + b))
    assert _det(FamilyTag.HYPERBOLIC_UMBILIC, {"a": 0.0, "x": 1.0, "y": 1.0}) == pytest.approx(36.0)
    assert _det(FamilyTag.HYPERBOLIC_UMBILIC, {"a": 2.0, "x": 0.5, "y": -0.1}) == pytest.approx(-1.8 - 4.0)
    assert _det(FamilyTag.ELLIPTIC_UMBILIC, {"a": 1.0, "x": 0.2, "y": 0.1}) == pytest.approx(4 - 36 * 0.05)


def test_morse_projection_is_identity():
    family = CatastropheFamily(FamilyTag.MORSE)
    chart = ChartPoint(family, [0.1, -0.2, 0.3])
    assert np.array_equal(jacobian_projection(family, chart), np.eye(3))
    assert projection_restricted(family, chart).tolist() == [0.1, -0.2, 0.3]


def test_adjugate_identity(rng):
    for _ in range(20):
        m = rng.normal(size=(3, 3))
        assert np.allclose(adjugate(m) @ m, np.linalg.det(m) * np.eye(3), atol=1e-12)
    assert adjugate(np.array([[5.0]])).tolist() == [[1.0]]


def test_adjugate_is_smooth_on_singular_matrices():
    singular = np.array([[1.0, 2.0], [2.0, 4.0]])
    assert np.allclose(adjugate(singular), [[4.0, -2.0], [-2.0, 1.0]])


@pytest.mark.parametrize("tag", CODIM_THREE)
def test_closed_forms_agree_with_adjugate(tag, rng):
    family = CatastropheFamily(tag)
    for _ in range(300):
        spec = random_linear_spec(family, rng)
        chart = ChartPoint(family, rng.uniform(-1, 1, 3))
        generic = desingularized_field_generic(spec, chart)
        closed = desingularized_field_closed(spec, chart)
        scale = 1.0 + np.max(np.abs(generic))
        assert np.max(np.abs(generic - closed)) <= 1e-9 * scale


@pytest.mark.slow
@pytest.mark.parametrize("tag", CODIM_THREE)
def test_closed_forms_agree_at_scale(tag):
    rng = np.random.default_rng(7)
    family = CatastropheFamily(tag)
    for _ in range(3400):
        spec = random_linear_spec(family, rng)
        chart = ChartPoint(family, rng.uniform(-1, 1, 3))
        generic = desingularized_field_generic(spec, chart)
        closed = desingularized_field_closed(spec, chart)
        assert np.max(np.abs(generic - closed)) <= 1e-9 * (1.0 + np.max(np.abs(generic)))


def test_closed_form_only_for_codim_three():
    spec = CdeSpec.from_expressions(CatastropheFamily(FamilyTag.CUSP), ["0", "1"])
    with pytest.raises(ValidationError):
        desingularized_field_closed(spec, ChartPoint(spec.family, [0.0, 0.0]))


@pytest.mark.parametrize("tag", [FamilyTag.FOLD, FamilyTag.CUSP] + CODIM_THREE)
def test_pushforward_identity(tag, rng):
    family = CatastropheFamily(tag)
    for _ in range(50):
        spec = random_linear_spec(family, rng)
        chart = ChartPoint(family, rng.uniform(-1.5, 1.5, family.slow_dim))
        assert pushforward_residual(spec, chart) <= 1e-12


def test_cusp_field_for_constant_b_flow():
    # Cusp, X = d/db: Xbar = (-1, 0) in the (x, a) chart
    spec = CdeSpec.from_expressions(CatastropheFamily(FamilyTag.CUSP), ["0", "1"])
    field_ = desingularized_field_generic(spec, ChartPoint(spec.family, [0.4, -0.3]))
    assert field_ == pytest.approx([-1.0, 0.0])


def test_polynomial_map_evaluation():
    poly = PolynomialMap(("x", "a"), {(1, 0): 2.0, (0, 2): 3.0, (0, 0): 0.0})
    assert poly([1.0, 2.0]) == pytest.approx(14.0)
    assert poly.degree == 2
    assert poly.constant == 0.0
    assert PolynomialMap(("x",), {})([3.0]) == 0.0


def test_polynomial_map_rejects_bad_terms():
    with pytest.raises(ValidationError):
        PolynomialMap(("x", "a"), {(1,): 1.0})
    with pytest.raises(ValidationError):
        PolynomialMap(("x",), {(1,): float("inf")})


def test_spec_from_expressions():
    family = CatastropheFamily(FamilyTag.CUSP)
    spec = CdeSpec.from_expressions(family, ["-2*(a + x)", "-1 - a"], name="nerve")
    assert spec.g_at_origin.tolist() == [0.0, -1.0]
    with pytest.raises(ValidationError):
        CdeSpec.from_expressions(family, ["z", "1"])
    with pytest.raises(ValidationError):
        CdeSpec.from_expressions(family, ["1/x", "1"])


def test_spec_dimension_and_degree_checks():
    family = CatastropheFamily(FamilyTag.CUSP)
    with pytest.raises(DimensionError):
        CdeSpec.from_expressions(family, ["1"])
    with pytest.raises(ValidationError, match="plafond"):
        CdeSpec.from_expressions(family, ["x**7", "1"])


def test_spec_json_formats():
    monomials = {
        "family": "swallowtail",
        "g": [[], [{"exponents": {"x": 1}, "coeff": 2.0}], [{"coeff": 1.0}]],
    }
    spec = CdeSpec.from_json(monomials)
    assert spec.family.tag is FamilyTag.SWALLOWTAIL
    assert spec.g_at_origin.tolist() == [0.0, 0.0, 1.0]
    again = CdeSpec.from_json(spec.to_json())
    assert again.g_at_origin.tolist() == spec.g_at_origin.tolist()
    strings = CdeSpec.from_json({"family": "cusp", "g": ["0", "x"], "potential_sign": -1})
    assert strings.potential_sign == -1


@pytest.mark.parametrize(
    "payload, field_name",
    [
        ({"g": ["1"]}, "family"),
        ({"family": "cusp"}, "g"),
        ({"family": "cusp", "g": [[{"exponents": {"q": 1}, "coeff": 1}], []]}, "g[0]"),
        ({"family": "cusp", "g": [[{"coeff": "abc"}], []]}, "g[0][0].coeff"),
    ],
)
def test_spec_json_errors_name_the_field(payload, field_name):
    with pytest.raises(ValidationError) as info:
        CdeSpec.from_json(payload)
    assert field_name in str(info.value)
