"""
Normal forms of CDEs with three parameters and spectral classification.

Construit les 16 formes normales polynomiales (et les 12 formes planes à
deux paramètres), linéarise le champ désingularisé à l'origine et attribue
à une CdeSpec son étiquette de forme normale par la signature du spectre.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from scipy.optimize import root

from .base import CheckReport, ConstructionError, PreconditionError, ValidationError
from .config import get_config
from .desingularization import (
    CdeSpec,
    PolynomialMap,
    desingularized_field_generic,
    jacobian_projection,
    projection_determinant,
)
from .potentials import (
    CatastropheFamily,
    ChartPoint,
    FamilyTag,
    family_symbols,
    linear_parameters,
    potential_of,
)
from .strata import UMBILIC_FOLD, FOLD, sample_stratum

logger = logging.getLogger(__name__)


class Variant(str, Enum):
    FLOW_BOX = "flow_box"
    FLOW_BOX_1 = "flow_box_1"
    FLOW_BOX_2 = "flow_box_2"
    SOURCE = "source"
    SADDLE = "saddle"
    SADDLE_1 = "saddle_1"
    SADDLE_2 = "saddle_2"
    SINK = "sink"
    FOCUS = "focus"
    DUAL_FLOW_BOX = "dual_flow_box"
    CENTER_SADDLE = "center_saddle"
    CENTER = "center"


# Groupes du tableau à trois paramètres : (famille, variantes)
GROUPS: Dict[str, Tuple[FamilyTag, Tuple[Variant, ...]]] = {
    "regular": (
        FamilyTag.MORSE,
        (Variant.FLOW_BOX, Variant.SOURCE, Variant.SADDLE_1, Variant.SADDLE_2, Variant.SINK),
    ),
    "fold": (
        FamilyTag.FOLD,
        (Variant.FLOW_BOX_1, Variant.FLOW_BOX_2, Variant.SOURCE, Variant.SINK, Variant.SADDLE),
    ),
    "cusp": (FamilyTag.CUSP, (Variant.FLOW_BOX, Variant.DUAL_FLOW_BOX)),
    "swallowtail": (FamilyTag.SWALLOWTAIL, (Variant.FLOW_BOX,)),
    "hyperbolic_umbilic": (FamilyTag.HYPERBOLIC_UMBILIC, (Variant.CENTER_SADDLE, Variant.CENTER)),
    "elliptic_umbilic": (FamilyTag.ELLIPTIC_UMBILIC, (Variant.CENTER_SADDLE,)),
}

# Formes à deux paramètres
PLANAR_GROUPS: Dict[str, Tuple[FamilyTag, Tuple[Variant, ...]]] = {
    "regular": (FamilyTag.MORSE, (Variant.FLOW_BOX, Variant.SOURCE, Variant.SADDLE, Variant.SINK)),
    "fold": (
        FamilyTag.FOLD,
        (Variant.FLOW_BOX_1, Variant.FLOW_BOX_2, Variant.SOURCE, Variant.SINK, Variant.SADDLE, Variant.FOCUS),
    ),
    "cusp": (FamilyTag.CUSP, (Variant.FLOW_BOX, Variant.DUAL_FLOW_BOX)),
}


def _group_family(group: str, variant: Variant, slow_dim: int) -> CatastropheFamily:
    tag = GROUPS[group][0] if group in GROUPS else PLANAR_GROUPS[group][0]
    sign = -1 if variant is Variant.DUAL_FLOW_BOX else 1
    return CatastropheFamily(tag, slow_dim, sign)


@dataclass(frozen=True, slots=True)
class NormalFormLabel:
    group: str
    variant: Variant

    def __post_init__(self) -> None:
        if self.group not in GROUPS:
            raise ValidationError(f"groupe de formes normales inconnu {self.group!r}")
        variant = Variant(self.variant)
        if variant not in GROUPS[self.group][1]:
            raise ValidationError(f"variante {variant.value!r} absente du groupe {self.group}")
        object.__setattr__(self, "variant", variant)

    @property
    def family(self) -> CatastropheFamily:
        return _group_family(self.group, self.variant, 3)

    def __str__(self) -> str:
        return f"{self.group}/{self.variant.value}"

    @classmethod
    def parse(cls, text: str) -> "NormalFormLabel":
        group, sep, variant = text.strip().lower().partition("/")
        if not sep:
            raise ValidationError(f"étiquette {text!r}: format groupe/variante attendu")
        try:
            return cls(group, Variant(variant))
        except ValueError as exc:
            raise ValidationError(f"étiquette inconnue {text!r}") from exc

    @classmethod
    def all(cls) -> List["NormalFormLabel"]:
        return [cls(group, variant) for group, (_, variants) in GROUPS.items() for variant in variants]


@dataclass(slots=True)
class NormalFormParams:
    """Free constants of the normal forms.

    ``rho_series``, ``eta_series`` and ``sigma_series`` are keyed by (l, j)
    and only make sense for the hyperbolic umbilic center; missing entries
    default to 1.
    """

    rho: int = 1
    delta: float = 0.1
    k: int = 3
    sign_choice: int = 1
    rho_series: Dict[Tuple[int, int], float] = field(default_factory=dict)
    eta_series: Dict[Tuple[int, int], float] = field(default_factory=dict)
    sigma_series: Dict[Tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.rho not in (1, -1):
            raise ValidationError("rho doit valoir ±1")
        if self.sign_choice not in (1, -1):
            raise ValidationError("sign_choice doit valoir ±1")
        if self.k < 2:
            raise ValidationError("l'ordre de troncature k doit être >= 2")

    @property
    def has_series(self) -> bool:
        return bool(self.rho_series or self.eta_series or self.sigma_series)

    def coefficient(self, kind: str, l: int, j: int) -> sp.Rational:
        value = getattr(self, f"{kind}_series").get((l, j), 1.0)
        if value == 0:
            raise ValidationError(f"{kind}[{l},{j}] doit être non nul")
        return sp.nsimplify(value)

    def to_dict(self) -> Dict[str, Any]:
        def series(values: Mapping[Tuple[int, int], float]) -> Dict[str, float]:
            return {f"{l},{j}": float(v) for (l, j), v in sorted(values.items())}

        return {
            "rho": self.rho,
            "delta": self.delta,
            "k": self.k,
            "sign_choice": self.sign_choice,
            "rho_series": series(self.rho_series),
            "eta_series": series(self.eta_series),
            "sigma_series": series(self.sigma_series),
        }


# ---------------------------------------------------------------------------
# Normal-form construction
# ---------------------------------------------------------------------------


def _hyperbolic_center(params: NormalFormParams, x, y, a) -> List[sp.Expr]:
    sixth = a / 6
    delta = (a / 108) * (a**2 + 18 * (x**2 + y**2) + 6 * (a * x + a * y))
    s_total = sp.Integer(0)
    b_total = a**2 / 6 - 6 * x * y
    c_total = -(a**2) / 6 + 6 * x * y
    for l in range(2, params.k + 1):
        s_l = sum(
            params.coefficient("rho", l, j) * sixth ** (l - j) * delta**j for j in range(0, l // 2 + 1)
        )
        s_total += s_l
        b_total += (6 * x + a - 6 * y) * s_l
        c_total += (6 * y + a - 6 * x) * s_l
        for j in range(0, (l - 1) // 2 + 1):
            eta, sigma = params.coefficient("eta", l, j), params.coefficient("sigma", l, j)
            c_lj = eta * (sixth + x) + sigma * (sixth + y)
            c_bar = eta * (sixth + y) - sigma * (sixth + x)
            a_lj = sixth ** (l - j) * delta**j
            for target, b_lj in ((0, -6 * x * c_lj - a * c_bar), (1, -a * c_lj - 6 * y * c_bar)):
                term = sp.cancel(a_lj * b_lj / sixth)
                if sp.fraction(sp.together(term))[1].free_symbols:
                    raise ConstructionError(f"terme ({l},{j}) non polynomial après simplification")
                if target == 0:
                    b_total += term
                else:
                    c_total += term
    return [6 * s_total, b_total, c_total]


def _expressions(group: str, variant: Variant, params: NormalFormParams, planar: bool) -> List[sp.Expr]:
    family = _group_family(group, variant, 2 if planar else 3)
    fast, slow = family_symbols(family)
    x = fast[0]
    a, b = slow[0], slow[1]
    c = slow[2] if len(slow) > 2 else None
    half = sp.Rational(1, 2)

    if group == "regular":
        forms = {
            Variant.FLOW_BOX: [1, 0, 0],
            Variant.SOURCE: [a, b, c],
            Variant.SADDLE_1: [a, b, -c] if c is not None else None,
            Variant.SADDLE_2: [a, -b, -c] if c is not None else None,
            Variant.SADDLE: [a, -b],
            Variant.SINK: [-a, -b, -c] if c is not None else [-a, -b],
        }
        exprs = forms[variant]
        return list(exprs[: family.slow_dim])

    if group == "fold" and planar:
        # Sur S_V, a = -x^2 : les coefficients de d/da portent sur le paramètre libre b
        forms = {
            Variant.FLOW_BOX_1: [1, 0],
            Variant.FLOW_BOX_2: [-1, 0],
            Variant.SOURCE: [b + 3 * x, 1],
            Variant.SINK: [b - 3 * x, 1],
            Variant.SADDLE: [-b, 1],
            Variant.FOCUS: [b + x, 1],
        }
        return forms[variant]

    if group == "fold":
        q = (c - b) ** 2 * (params.rho + sp.nsimplify(params.delta) * (c - b))
        tail = [-q + half, q + half]
        if variant is Variant.FLOW_BOX_1:
            return [1, 0, 0]
        if variant is Variant.FLOW_BOX_2:
            return [-1, 0, 0]
        if variant is Variant.SOURCE:
            return [3 * x + half * b + half * c, *tail]
        if variant is Variant.SINK:
            return [-3 * x + half * b + half * c, *tail]
        return [-(half * b + half * c), *tail]

    if group == "cusp":
        return [0, 1] if planar else [0, 1, 0]

    if group == "swallowtail":
        return [0, 0, 1]

    delta = sp.nsimplify(params.delta)
    if group == "hyperbolic_umbilic":
        y = fast[1]
        if variant is Variant.CENTER:
            return _hyperbolic_center(params, x, y, a)
        phi = params.sign_choice * a**2 / 36 + delta * a**3 / 216
        tail = -phi * (6 * x + 6 * y + a) + 6 * x * y - a**2 / 6
        return [6 * phi, tail, tail]

    y = fast[1]
    big_a = sp.Rational(1, 9) * (params.sign_choice * 3 * a**2 + delta * a**3)
    big_b = -6 * x**2 - 6 * y**2 + sp.Rational(2, 3) * a**2
    root2 = sp.sqrt(2)
    return [big_a, (big_b - 2 * x * big_a) / root2, (big_b - 2 * y * big_a) / root2]


def _build(
    family: CatastropheFamily, exprs: Sequence[Any], name: str
) -> CdeSpec:
    fast, slow = family_symbols(family)
    symbols = fast + slow
    g = tuple(PolynomialMap.from_sympy(sp.sympify(e), symbols) for e in exprs)
    cap = max(get_config().degree_cap, max(component.degree for component in g))
    return CdeSpec(family, g, degree_cap=cap, name=name)


def normal_form_instance(label: NormalFormLabel, params: Optional[NormalFormParams] = None) -> CdeSpec:
    """CdeSpec of a normal form of the three-parameter table."""
    params = params or NormalFormParams()
    is_center = label.group == "hyperbolic_umbilic" and label.variant is Variant.CENTER
    if params.has_series and not is_center:
        raise ValidationError(f"{label}: coefficients de série réservés à hyperbolic_umbilic/center")
    exprs = _expressions(label.group, label.variant, params, planar=False)
    return _build(label.family, exprs, str(label))


def planar_normal_form_instance(group: str, variant: str | Variant) -> CdeSpec:
    """CdeSpec of one of the 12 two-parameter normal forms."""
    if group not in PLANAR_GROUPS:
        raise ValidationError(f"groupe plan inconnu {group!r}")
    try:
        variant = Variant(variant)
    except ValueError as exc:
        raise ValidationError(f"variante inconnue {variant!r}") from exc
    if variant not in PLANAR_GROUPS[group][1]:
        raise ValidationError(f"variante {variant.value!r} absente du groupe plan {group}")
    family = _group_family(group, variant, 2)
    exprs = _expressions(group, variant, NormalFormParams(), planar=True)
    return _build(family, exprs, f"planar/{group}/{variant.value}")


# ---------------------------------------------------------------------------
# Linearization and spectra
# ---------------------------------------------------------------------------


def _origin(family: CatastropheFamily) -> ChartPoint:
    return ChartPoint(family, np.zeros(family.slow_dim))


def _field_jacobian(spec: CdeSpec, chart: np.ndarray, h: float) -> np.ndarray:
    family = spec.family
    m = family.slow_dim
    jac = np.empty((m, m))
    for k in range(m):
        step = np.zeros(m)
        step[k] = h
        plus = desingularized_field_generic(spec, ChartPoint(family, chart + step))
        minus = desingularized_field_generic(spec, ChartPoint(family, chart - step))
        jac[:, k] = (plus - minus) / (2 * h)
    return jac


def linearize_at(spec: CdeSpec, chart: Sequence[float], h: float = 1e-6) -> np.ndarray:
    """Jacobian of the desingularized field, central differences with one Richardson step."""
    chart = np.asarray(chart, dtype=float)
    coarse = _field_jacobian(spec, chart, h)
    fine = _field_jacobian(spec, chart, h / 2)
    jac = (4 * fine - coarse) / 3
    logger.debug("Richardson: écart %.3e", float(np.max(np.abs(fine - coarse))))
    return jac


def linearize_origin(spec: CdeSpec) -> np.ndarray:
    return linearize_at(spec, np.zeros(spec.family.slow_dim))


@dataclass(slots=True)
class SpectrumClass:
    eigenvalues: np.ndarray
    n_zero: int
    n_pos_real: int
    n_neg_real: int
    n_imag_pair: int
    n_unstable: int = 0
    n_stable: int = 0

    @property
    def signature(self) -> Tuple[int, int, int, int]:
        return (self.n_zero, self.n_pos_real, self.n_neg_real, self.n_imag_pair)

    @property
    def hyperbolic(self) -> bool:
        return self.n_unstable + self.n_stable == self.eigenvalues.size

    def pairs(self) -> List[List[float]]:
        return [[float(v.real), float(v.imag)] for v in self.eigenvalues]


def classify_spectrum(matrix: np.ndarray, tol: Optional[float] = None) -> SpectrumClass:
    """Signature of the spectrum, with a zero band relative to the matrix scale."""
    tol = get_config().spectrum_tol if tol is None else tol
    if tol <= 0:
        raise ValidationError("tol doit être strictement positif")
    matrix = np.asarray(matrix, dtype=float)
    eigenvalues = np.linalg.eigvals(matrix)
    eigenvalues = eigenvalues[np.lexsort((eigenvalues.imag, eigenvalues.real))]
    band = tol * float(np.max(np.abs(matrix))) if matrix.size else 0.0
    n_zero = n_pos = n_neg = n_imag = n_unstable = n_stable = 0
    for value in eigenvalues:
        if value.real > band:
            n_unstable += 1
        elif value.real < -band:
            n_stable += 1
        if abs(value.imag) > band:
            if value.imag > 0:
                n_imag += 1
            continue
        if abs(value.real) <= band:
            n_zero += 1
        elif value.real > 0:
            n_pos += 1
        else:
            n_neg += 1
    return SpectrumClass(eigenvalues, n_zero, n_pos, n_neg, n_imag, n_unstable, n_stable)


@lru_cache(maxsize=None)
def _chart_symbols(family: CatastropheFamily) -> Tuple[Tuple[sp.Symbol, ...], Dict[str, sp.Expr]]:
    """Chart symbols and the symbolic lift of every total coordinate."""
    fast, slow = family_symbols(family)
    by_name = {s.name: s for s in fast + slow}
    chart = tuple(by_name[n] for n in family.chart_names)
    lift: Dict[str, sp.Expr] = {s.name: s for s in fast + slow}
    linear = linear_parameters(family)
    padded = list(slow) + [sp.Integer(0)] * (4 - len(slow))
    reduced = dict.fromkeys((slow[i] for i in linear), 0)
    unsigned = potential_of(family).symbolic(fast, padded)
    for i, index in enumerate(linear):
        lift[slow[index].name] = sp.expand(-sp.diff(unsigned, fast[i]).subs(reduced))
    for name in family.chart_names:
        lift[name] = by_name[name]
    return chart, lift


def _homogeneous(expr: sp.Expr, symbols: Sequence[sp.Symbol], degree: int) -> sp.Expr:
    poly = sp.Poly(sp.expand(expr), *symbols)
    return sum(
        (coeff * sp.Mul(*[s**e for s, e in zip(symbols, monom)]) for monom, coeff in poly.terms() if sum(monom) == degree),
        sp.Integer(0),
    )


def _low_degree(expr: sp.Expr, symbols: Sequence[sp.Symbol]) -> int:
    poly = sp.Poly(sp.expand(expr), *symbols)
    degrees = [sum(monom) for monom, coeff in poly.terms() if coeff != 0]
    return min(degrees) if degrees else -1


def reduced_linearization(spec: CdeSpec) -> Tuple[np.ndarray, float]:
    """Linear field L with X = d pi~(p) . L p at the lowest orders, by least squares.

    When X vanishes on the whole degenerate point (normal forms of the
    umbilics) the desingularized field has a zero linear part and this fit
    recovers the linearization of the field before multiplication by det.
    """
    family = spec.family
    chart, lift = _chart_symbols(family)
    m = len(chart)
    fast, slow = family_symbols(family)
    total = fast + slow
    substitution = {s: lift[s.name] for s in total}
    field_ = [sp.expand(expr.subs(substitution, simultaneous=True)) for expr in spec.slow_field_sympy()]
    projection = sp.Matrix([lift[s.name] for s in slow])
    jac = projection.jacobian(sp.Matrix(chart))
    unknowns = sp.symbols(f"l0:{m * m}")
    l_matrix = sp.Matrix(m, m, unknowns)
    p = sp.Matrix(chart)

    equations: List[sp.Expr] = []
    for k in range(m):
        row_degree = min(d for d in (_low_degree(entry, chart) for entry in jac.row(k)) if d >= 0)
        low_row = sp.Matrix([[_homogeneous(entry, chart, row_degree) for entry in jac.row(k)]])
        target = sum((_homogeneous(field_[k], chart, d) for d in range(row_degree + 2)), sp.Integer(0))
        difference = sp.expand(target - (low_row * l_matrix * p)[0, 0])
        if difference == 0:
            continue
        equations.extend(sp.Poly(difference, *chart).coeffs())

    if not equations:
        return np.zeros((m, m)), 0.0
    a_sym, b_sym = sp.linear_eq_to_matrix(equations, unknowns)
    a_num = np.array(a_sym.tolist(), dtype=float)
    b_num = np.array(b_sym.tolist(), dtype=float).ravel()
    solution, *_ = np.linalg.lstsq(a_num, b_num, rcond=None)
    residual = float(np.linalg.norm(a_num @ solution - b_num))
    return solution.reshape(m, m), residual


# ---------------------------------------------------------------------------
# Equilibria
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class EquilibriumPoint:
    chart: ChartPoint
    on_singular: bool
    residual: float
    spectrum: Optional[SpectrumClass] = None

    @property
    def kind(self) -> str:
        if self.spectrum is None:
            return "unknown"
        prefix = "folded_" if self.on_singular else ""
        s = self.spectrum
        if s.n_imag_pair and not s.n_unstable and not s.n_stable:
            return prefix + "center"
        if s.n_unstable and s.n_stable:
            return prefix + "saddle"
        name = "focus" if s.n_imag_pair else "node"
        if s.n_zero:
            name = "degenerate"
        return prefix + name

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.chart.as_dict(),
            "on_singular": self.on_singular,
            "residual": self.residual,
            "kind": self.kind,
            "spectrum": [] if self.spectrum is None else self.spectrum.pairs(),
        }


def find_equilibria(
    spec: CdeSpec,
    region: Optional[np.ndarray] = None,
    grid: Optional[int] = None,
    tol: Optional[float] = None,
) -> List[EquilibriumPoint]:
    """Zeros of the desingularized field, from a grid of Newton seeds."""
    family = spec.family
    m = family.slow_dim
    grid = grid if grid is not None else (21 if m <= 2 else 7)
    if grid < 2:
        raise ValidationError("grid doit être >= 2")
    tol = get_config().equilibrium_tol if tol is None else tol
    box = np.tile([-2.0, 2.0], (m, 1)) if region is None else np.asarray(region, dtype=float)
    if box.shape != (m, 2):
        raise ValidationError(f"region: tableau ({m}, 2) attendu")

    def residual(z: np.ndarray) -> np.ndarray:
        return desingularized_field_generic(spec, ChartPoint(family, z))

    axes = [np.linspace(lo, hi, grid) for lo, hi in box]
    found: List[np.ndarray] = []
    for seed in itertools.product(*axes):
        solution = root(residual, np.array(seed), method="hybr", options={"xtol": 1e-14})
        z = solution.x
        for _ in range(5):
            value = residual(z)
            if np.max(np.abs(value)) <= tol:
                break
            step, *_ = np.linalg.lstsq(linearize_at(spec, z), value, rcond=None)
            z = z - step
        if not np.all(np.isfinite(z)) or np.max(np.abs(residual(z))) > tol:
            continue
        if np.any(z < box[:, 0] - 1e-9) or np.any(z > box[:, 1] + 1e-9):
            continue
        if all(np.max(np.abs(z - other)) > 1e-6 for other in found):
            found.append(z)

    det_tol = get_config().det_tol
    points = []
    for z in sorted(found, key=tuple):
        chart = ChartPoint(family, z)
        det = projection_determinant(family, chart)
        spectrum = classify_spectrum(linearize_at(spec, z))
        points.append(
            EquilibriumPoint(chart, abs(det) <= det_tol * 1e2, float(np.max(np.abs(residual(z)))), spectrum)
        )
    logger.debug("%s: %d équilibres trouvés", spec.name or family.name, len(points))
    return points


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class Classification:
    label: Optional[NormalFormLabel]
    spectrum: Optional[SpectrumClass]
    generic: bool
    report: CheckReport
    equilibria: List[EquilibriumPoint] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return str(self.label) if self.generic and self.label is not None else "not_generic"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.verdict,
            "spectrum": [] if self.spectrum is None else self.spectrum.pairs(),
            "generic": self.generic,
            "notes": list(self.report.messages),
            "equilibria": [e.to_dict() for e in self.equilibria],
        }


def transversality_check(
    spec: CdeSpec, samples: int = 50, angle_tol: float = 1e-3, rng: Optional[np.random.Generator] = None
) -> CheckReport:
    """Sampled check that X is not tangent to the catastrophe set on the fold stratum."""
    report = CheckReport()
    family = spec.family
    if family.tag is FamilyTag.MORSE:
        report.add("ok: pas d'ensemble singulier")
        return report
    label = UMBILIC_FOLD if family.fast_dim == 2 else FOLD
    rng = rng if rng is not None else np.random.default_rng(get_config().seed)
    tangent = skipped = 0
    for point in sample_stratum(family, label, samples, rng):
        chart = ChartPoint(family, [point.as_dict(family)[n] for n in family.chart_names])
        field_ = spec.slow_field(point)
        if np.linalg.norm(field_) <= 1e-12:
            skipped += 1
            continue
        # Normale à l'image de d pi~ : vecteur singulier gauche associé à la plus petite valeur singulière
        u, _, _ = np.linalg.svd(jacobian_projection(family, chart))
        normal = u[:, -1]
        sine = abs(float(normal @ field_)) / float(np.linalg.norm(field_))
        if sine < np.sin(angle_tol):
            tangent += 1
    checked = samples - skipped
    if tangent:
        report.add(f"warning: X tangent à l'ensemble catastrophe en {tangent}/{checked} points de B")
    else:
        report.add(f"ok: X transverse à l'ensemble catastrophe sur {checked} points de B")
    if skipped:
        report.add(f"warning: X nul en {skipped} points de B échantillonnés")
    return report


def _not_generic(report: CheckReport, reason: str, spectrum: Optional[SpectrumClass] = None) -> Classification:
    report.add(f"warning: non générique: {reason}")
    return Classification(None, spectrum, False, report)


def _umbilic_spectrum(spec: CdeSpec, tol: float, report: CheckReport) -> SpectrumClass:
    linear = linearize_origin(spec)
    if float(np.max(np.abs(linear))) > tol:
        return classify_spectrum(linear, tol)
    reduced, residual = reduced_linearization(spec)
    report.add(f"ok: partie linéaire nulle, linéarisation réduite (résidu {residual:.2e})")
    return classify_spectrum(reduced, tol)


def classify_cde(spec: CdeSpec, tol: Optional[float] = None, scan_equilibria: Optional[bool] = None) -> Classification:
    """Normal-form label of a CDE, with its genericity report."""
    tol = get_config().spectrum_tol if tol is None else tol
    family = spec.family
    tag = family.tag
    report = CheckReport()
    if tag not in (FamilyTag.MORSE, FamilyTag.FOLD) and family.codimension > 3:
        raise PreconditionError(f"{family.name}: codimension {family.codimension} > 3")
    if tag in (FamilyTag.NON_CRITICAL,):
        raise PreconditionError("non_critical: pas de forme normale")
    if tag in (FamilyTag.MORSE, FamilyTag.FOLD) and family.slow_dim != 3:
        raise PreconditionError(f"{family.name}: classification à trois paramètres (slow_dim={family.slow_dim})")

    x_bar0 = desingularized_field_generic(spec, _origin(family))
    scale = max(1.0, float(np.max(np.abs(spec.g_at_origin))))
    spectrum: Optional[SpectrumClass] = None
    label: Optional[NormalFormLabel] = None

    if tag is FamilyTag.MORSE:
        if np.linalg.norm(x_bar0) > tol * scale:
            label = NormalFormLabel("regular", Variant.FLOW_BOX)
        else:
            spectrum = classify_spectrum(linearize_origin(spec), tol)
            if not spectrum.hyperbolic:
                return _not_generic(report, "équilibre non hyperbolique", spectrum)
            variants = [Variant.SINK, Variant.SADDLE_2, Variant.SADDLE_1, Variant.SOURCE]
            label = NormalFormLabel("regular", variants[spectrum.n_unstable])

    elif tag is FamilyTag.FOLD:
        if abs(x_bar0[0]) > tol * scale:
            label = NormalFormLabel("fold", Variant.FLOW_BOX_1 if x_bar0[0] > 0 else Variant.FLOW_BOX_2)
        else:
            spectrum = classify_spectrum(linearize_origin(spec), tol)
            if spectrum.n_zero != 1 or spectrum.n_imag_pair:
                return _not_generic(report, "X_a(0) = 0 sans paire hyperbolique réelle", spectrum)
            if spectrum.n_unstable == 2:
                label = NormalFormLabel("fold", Variant.SOURCE)
            elif spectrum.n_stable == 2:
                label = NormalFormLabel("fold", Variant.SINK)
            else:
                label = NormalFormLabel("fold", Variant.SADDLE)

    elif tag is FamilyTag.CUSP:
        if np.linalg.norm(x_bar0) <= tol * scale:
            return _not_generic(report, "f_b(0) = 0")
        label = NormalFormLabel("cusp", Variant.DUAL_FLOW_BOX if family.sign < 0 else Variant.FLOW_BOX)

    elif tag is FamilyTag.SWALLOWTAIL:
        if abs(spec.g_at_origin[2]) <= tol * scale:
            return _not_generic(report, "f_c(0) = 0")
        label = NormalFormLabel("swallowtail", Variant.FLOW_BOX)

    else:
        f_b, f_c = spec.g_at_origin[1], spec.g_at_origin[2]
        spectrum = _umbilic_spectrum(spec, tol, report)
        if spectrum.n_zero != 1:
            return _not_generic(report, f"spectre dégénéré (f_b(0) f_c(0) = {f_b * f_c:.3g})", spectrum)
        group = tag.value
        if spectrum.n_pos_real == 1 and spectrum.n_neg_real == 1:
            label = NormalFormLabel(group, Variant.CENTER_SADDLE)
        elif spectrum.n_imag_pair == 1 and not spectrum.n_unstable and not spectrum.n_stable:
            if tag is not FamilyTag.HYPERBOLIC_UMBILIC:
                return _not_generic(report, "paire imaginaire pour l'ombilic elliptique", spectrum)
            label = NormalFormLabel(group, Variant.CENTER)
        else:
            return _not_generic(report, "paire ni réelle opposée ni imaginaire pure", spectrum)

    if tag is not FamilyTag.MORSE:
        report.extend(transversality_check(spec))

    if scan_equilibria is None:
        scan_equilibria = family.slow_dim <= 2
    equilibria: List[EquilibriumPoint] = []
    if scan_equilibria:
        equilibria = find_equilibria(spec)
        for point in equilibria:
            if point.on_singular:
                coords = ", ".join(f"{n}={v:.6g}" for n, v in point.chart.as_dict().items())
                report.add(f"warning: singularité repliée ({point.kind}) en ({coords})")
    report.add(f"ok: classé {label}")
    return Classification(label, spectrum, True, report, equilibria)


# ---------------------------------------------------------------------------
# Fold forms restricted to the plane {b = c}
# ---------------------------------------------------------------------------


def fold_plane_reduction(
    variant: str | Variant, samples: int = 20, rng: Optional[np.random.Generator] = None
) -> CheckReport:
    """Compare a three-parameter fold form on {b = c} with its planar form.

    Le plan {b = c} doit être invariant. Les boîtes de flot coïncident
    exactement avec la forme plane ; pour les autres variantes on compare
    les signatures des linéarisations restreintes au plan.
    """
    variant = Variant(variant)
    label = NormalFormLabel("fold", variant)
    spec = normal_form_instance(label)
    planar = planar_normal_form_instance("fold", variant)
    rng = rng if rng is not None else np.random.default_rng(get_config().seed)
    report = CheckReport()

    worst_invariance = worst_match = 0.0
    exact = variant in (Variant.FLOW_BOX_1, Variant.FLOW_BOX_2)
    for x, u in rng.uniform(-1.0, 1.0, size=(samples, 2)):
        field_ = desingularized_field_generic(spec, ChartPoint(spec.family, [x, u, u]))
        worst_invariance = max(worst_invariance, abs(field_[1] - field_[2]) / (1.0 + np.max(np.abs(field_))))
        if exact:
            reduced = desingularized_field_generic(planar, ChartPoint(planar.family, [x, u]))
            worst_match = max(worst_match, float(np.max(np.abs(field_[:2] - reduced))))
    if worst_invariance <= 1e-9:
        report.add(f"ok: {label}: plan {{b = c}} invariant")
    else:
        report.add(f"error: {label}: plan {{b = c}} non invariant (écart {worst_invariance:.2e})")

    if exact:
        if worst_match <= 1e-9:
            report.add(f"ok: {label}: champ égal à la forme plane sur {{b = c}}")
        else:
            report.add(f"error: {label}: écart {worst_match:.2e} avec la forme plane")
        return report

    # Base du plan : e_x = (1, 0, 0), e_u = (0, 1, 1)
    full = linearize_origin(spec)
    restricted = np.array(
        [[full[0, 0], full[0, 1] + full[0, 2]], [full[1, 0], full[1, 1] + full[1, 2]]]
    )
    ours = classify_spectrum(restricted)
    theirs = classify_spectrum(linearize_origin(planar))
    if ours.signature == theirs.signature and (ours.n_unstable, ours.n_stable) == (theirs.n_unstable, theirs.n_stable):
        report.add(f"ok: {label}: signature restreinte {ours.signature} identique à la forme plane")
    else:
        report.add(f"error: {label}: signature restreinte {ours.signature} != {theirs.signature}")
    return report
