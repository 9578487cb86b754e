import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdeflow.base import PreconditionError, ValidationError
from cdeflow.classifier import (
    PLANAR_GROUPS,
    NormalFormLabel,
    NormalFormParams,
    Variant,
    classify_cde,
    classify_spectrum,
    find_equilibria,
    fold_plane_reduction,
    linearize_origin,
    normal_form_instance,
    planar_normal_form_instance,
    reduced_linearization,
)
from cdeflow.desingularization import CdeSpec
from cdeflow.potentials import CatastropheFamily, FamilyTag
from cdeflow.slowfast import zeeman_nerve
from tests.conftest import random_linear_spec

PLANAR_LABELS = [(group, variant) for group, (_, variants) in PLANAR_GROUPS.items() for variant in variants]


@pytest.mark.parametrize("label", NormalFormLabel.all(), ids=str)
def test_normal_forms_classify_to_their_own_label(label):
    classification = classify_cde(normal_form_instance(label))
    assert classification.generic
    assert classification.label == label
    assert classification.to_dict()["label"] == str(label)


def test_table_sizes():
    assert len(NormalFormLabel.all()) == 16
    assert len(PLANAR_LABELS) == 12


@pytest.mark.parametrize(
    "group, variant, unstable, stable, pairs",
    [
        ("regular", "source", 2, 0, 0),
        ("regular", "saddle", 1, 1, 0),
        ("regular", "sink", 0, 2, 0),
        ("fold", "source", 2, 0, 0),
        ("fold", "sink", 0, 2, 0),
        ("fold", "saddle", 1, 1, 0),
        ("fold", "focus", 2, 0, 1),
    ],
)
def test_planar_equilibrium_types(group, variant, unstable, stable, pairs):
    spectrum = classify_spectrum(linearize_origin(planar_normal_form_instance(group, variant)))
    assert (spectrum.n_unstable, spectrum.n_stable, spectrum.n_imag_pair) == (unstable, stable, pairs)


@pytest.mark.parametrize("group, variant", PLANAR_LABELS)
def test_planar_instances(group, variant):
    spec = planar_normal_form_instance(group, variant)
    assert spec.family.slow_dim == 2
    assert spec.name == f"planar/{group}/{variant.value}"


def test_planar_fold_source_linearization():
    jac = linearize_origin(planar_normal_form_instance("fold", "source"))
    assert np.allclose(jac, [[3.0, 1.0], [-2.0, 0.0]], atol=1e-8)


def test_planar_rejects_unknown_forms():
    with pytest.raises(ValidationError):
        planar_normal_form_instance("swallowtail", "flow_box")
    with pytest.raises(ValidationError):
        planar_normal_form_instance("regular", "saddle_1")
    with pytest.raises(ValidationError):
        planar_normal_form_instance("fold", "spiral")


@pytest.mark.parametrize("variant", ["flow_box_1", "flow_box_2", "source", "sink", "saddle"])
def test_fold_forms_reduce_to_planar_forms(variant, rng):
    report = fold_plane_reduction(variant, rng=rng)
    assert report.passed, report.messages


def test_hyperbolic_umbilic_spectrum_on_random_affine_fields(rng):
    family = CatastropheFamily(FamilyTag.HYPERBOLIC_UMBILIC)
    kinds = set()
    for _ in range(100):
        spec = random_linear_spec(family, rng)
        origin = np.zeros(len(family.variable_names))
        f_b, f_c = spec.g[1](origin), spec.g[2](origin)
        spectrum = classify_spectrum(linearize_origin(spec))
        expected = 6 * np.sqrt(abs(f_b * f_c))
        if f_b * f_c > 0:
            kinds.add("real")
            assert sorted(spectrum.eigenvalues.real) == pytest.approx([-expected, 0.0, expected], rel=1e-7, abs=1e-9)
            assert np.allclose(spectrum.eigenvalues.imag, 0.0, atol=1e-9)
        else:
            kinds.add("imaginary")
            assert sorted(spectrum.eigenvalues.imag) == pytest.approx([-expected, 0.0, expected], rel=1e-7, abs=1e-9)
            assert np.allclose(spectrum.eigenvalues.real, 0.0, atol=1e-9)
    assert kinds == {"real", "imaginary"}


def test_hyperbolic_umbilic_center_saddle_label():
    family = CatastropheFamily(FamilyTag.HYPERBOLIC_UMBILIC)
    spec = CdeSpec.from_expressions(family, ["0", "1", "2"])
    assert classify_cde(spec).label == NormalFormLabel("hyperbolic_umbilic", Variant.CENTER_SADDLE)


def test_hyperbolic_umbilic_center_spectrum():
    family = CatastropheFamily(FamilyTag.HYPERBOLIC_UMBILIC)
    spec = CdeSpec.from_expressions(family, ["0", "1", "-2"])
    spectrum = classify_spectrum(linearize_origin(spec))
    assert spectrum.signature == (1, 0, 0, 1)
    assert max(spectrum.eigenvalues.imag) == pytest.approx(6 * np.sqrt(2), abs=1e-6)
    assert classify_cde(spec).label == NormalFormLabel("hyperbolic_umbilic", Variant.CENTER)


def test_degenerate_umbilic_is_not_generic():
    family = CatastropheFamily(FamilyTag.HYPERBOLIC_UMBILIC)
    spec = CdeSpec.from_expressions(family, ["0", "1", "0"])
    classification = classify_cde(spec)
    assert not classification.generic
    assert classification.verdict == "not_generic"


def test_reduced_linearization_of_the_center_saddle():
    spec = normal_form_instance(NormalFormLabel("hyperbolic_umbilic", Variant.CENTER_SADDLE))
    reduced, _ = reduced_linearization(spec)
    expected = np.array([[0.0, 0.0, 0.0], [1 / 6, 0.0, -1.0], [1 / 6, -1.0, 0.0]])
    assert np.allclose(reduced, expected, atol=1e-9)


def test_spectrum_signature():
    spectrum = classify_spectrum(np.diag([1.0, -2.0, 0.0]))
    assert spectrum.signature == (1, 1, 1, 0)
    assert not spectrum.hyperbolic
    rotation = classify_spectrum(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert rotation.signature == (0, 0, 0, 1)
    assert (rotation.n_unstable, rotation.n_stable) == (0, 0)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False, allow_subnormal=False), min_size=9, max_size=9),
    st.integers(-10, 10),
)
def test_spectrum_signature_is_scale_invariant(entries, exponent):
    scale = 2.0**exponent
    matrix = np.array(entries).reshape(3, 3)
    if np.max(np.abs(matrix)) < 1e-3:
        return
    base = classify_spectrum(matrix)
    scaled = classify_spectrum(scale * matrix)
    assert base.signature == scaled.signature
    assert (base.n_unstable, base.n_stable) == (scaled.n_unstable, scaled.n_stable)


def test_nerve_equilibria():
    points = find_equilibria(zeeman_nerve())
    assert len(points) == 2
    by_kind = {point.kind: point.chart.coords for point in points}
    assert set(by_kind) == {"focus", "folded_saddle"}
    assert by_kind["focus"] == pytest.approx([1.0, -1.0], abs=1e-8)
    assert by_kind["folded_saddle"] == pytest.approx([0.5, -0.75], abs=1e-8)


def test_nerve_classification_reports_the_folded_saddle():
    classification = classify_cde(zeeman_nerve())
    assert classification.label == NormalFormLabel("cusp", Variant.FLOW_BOX)
    assert any("folded_saddle" in message for message in classification.report.messages)
    assert len(classification.to_dict()["equilibria"]) == 2


def test_find_equilibria_validates_its_region():
    with pytest.raises(ValidationError):
        find_equilibria(zeeman_nerve(), region=np.array([[-1.0, 1.0]]))
    with pytest.raises(ValidationError):
        find_equilibria(zeeman_nerve(), grid=1)


def test_classification_preconditions():
    morse = CatastropheFamily(FamilyTag.MORSE, slow_dim=2)
    with pytest.raises(PreconditionError):
        classify_cde(CdeSpec.from_expressions(morse, ["a", "b"]))
    butterfly = CatastropheFamily(FamilyTag.BUTTERFLY)
    with pytest.raises(PreconditionError):
        classify_cde(CdeSpec.from_expressions(butterfly, ["0", "0", "0", "1"]))


def test_series_coefficients_only_for_the_center():
    params = NormalFormParams(rho_series={(2, 0): 2.0})
    with pytest.raises(ValidationError):
        normal_form_instance(NormalFormLabel("cusp", Variant.FLOW_BOX), params)
    spec = normal_form_instance(NormalFormLabel("hyperbolic_umbilic", Variant.CENTER), params)
    assert classify_cde(spec).label.variant is Variant.CENTER


def test_params_validation():
    with pytest.raises(ValidationError):
        NormalFormParams(rho=2)
    with pytest.raises(ValidationError):
        NormalFormParams(k=1)
    with pytest.raises(ValidationError):
        NormalFormParams(eta_series={(2, 0): 0.0}).coefficient("eta", 2, 0)


def test_label_parsing():
    assert NormalFormLabel.parse(" Fold/Sink ") == NormalFormLabel("fold", Variant.SINK)
    assert str(NormalFormLabel.parse("cusp/dual_flow_box")) == "cusp/dual_flow_box"
    for text in ("fold", "fold/center", "nope/sink"):
        with pytest.raises(ValidationError):
            NormalFormLabel.parse(text)
