"""
Desingularized vector field of a constrained differential equation.

Construit la projection restreinte pi~ = pi|S_V, sa jacobienne, et le champ
désingularisé Xbar = adj(d pi~) X, de façon générique (adjugée) ou par les
formes fermées des familles de codimension 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp

from .base import ConstructionError, DimensionError, ValidationError
from .config import get_config
from .potentials import (
    CatastropheFamily,
    ChartPoint,
    FamilyTag,
    TotalPoint,
    family_symbols,
    hessian_fast,
    lift_to_constraint,
    linear_parameters,
    mixed_derivatives,
)

# Tangent vector in chart coordinates
ChartVector = np.ndarray

# Orientation constant of the closed forms relative to the adjugate construction
CLOSED_FORM_ORIENTATION: Dict[FamilyTag, int] = {
    FamilyTag.SWALLOWTAIL: 1,
    FamilyTag.ELLIPTIC_UMBILIC: 1,
    FamilyTag.HYPERBOLIC_UMBILIC: 1,
}


@dataclass(frozen=True, eq=False)
class PolynomialMap:
    """Real polynomial stored as {exponent multi-index: coefficient}."""

    variables: Tuple[str, ...]
    terms: Mapping[Tuple[int, ...], float]
    _exponents: np.ndarray = field(init=False, repr=False)
    _coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        variables = tuple(self.variables)
        clean: Dict[Tuple[int, ...], float] = {}
        for exponents, coeff in self.terms.items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != len(variables) or min(exponents, default=0) < 0:
                raise ValidationError(f"exposants {exponents} incompatibles avec {variables}")
            value = float(coeff)
            if not np.isfinite(value):
                raise ValidationError(f"coefficient non fini pour {exponents}")
            if value != 0.0:
                clean[exponents] = clean.get(exponents, 0.0) + value
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "terms", clean)
        exps = np.array(list(clean.keys()), dtype=int).reshape(len(clean), len(variables))
        object.__setattr__(self, "_exponents", exps)
        object.__setattr__(self, "_coeffs", np.array(list(clean.values()), dtype=float))

    def __call__(self, values: Sequence[float]) -> float:
        if not self.terms:
            return 0.0
        values = np.asarray(values, dtype=float)
        return float(np.prod(np.power(values, self._exponents), axis=1) @ self._coeffs)

    @property
    def degree(self) -> int:
        return int(self._exponents.sum(axis=1).max()) if self.terms else 0

    @property
    def constant(self) -> float:
        return self.terms.get(tuple(0 for _ in self.variables), 0.0)

    @classmethod
    def constant_map(cls, variables: Sequence[str], value: float) -> "PolynomialMap":
        return cls(tuple(variables), {tuple(0 for _ in variables): value})

    @classmethod
    def from_sympy(cls, expr: Any, symbols: Sequence[sp.Symbol]) -> "PolynomialMap":
        try:
            poly = sp.Poly(sp.expand(expr), *symbols)
        except sp.PolynomialError as exc:
            raise ConstructionError(f"expression non polynomiale: {expr}") from exc
        terms = {monom: float(coeff) for monom, coeff in poly.terms()}
        return cls(tuple(s.name for s in symbols), terms)

    def to_sympy(self, symbols: Sequence[sp.Symbol]) -> sp.Expr:
        expr = sp.Integer(0)
        for exponents, coeff in self.terms.items():
            expr += sp.Float(coeff) * sp.Mul(*[s**e for s, e in zip(symbols, exponents)])
        return expr

    def to_json(self) -> List[Dict[str, Any]]:
        return [
            {
                "exponents": {n: e for n, e in zip(self.variables, exps) if e},
                "coeff": coeff,
            }
            for exps, coeff in sorted(self.terms.items())
        ]

    @classmethod
    def from_json(cls, entries: Any, variables: Sequence[str], where: str = "g") -> "PolynomialMap":
        if not isinstance(entries, list):
            raise ValidationError(f"champ '{where}': liste de monômes attendue")
        terms: Dict[Tuple[int, ...], float] = {}
        for k, entry in enumerate(entries):
            if not isinstance(entry, dict) or "coeff" not in entry:
                raise ValidationError(f"champ '{where}[{k}]': objet {{exponents, coeff}} attendu")
            exponents = entry.get("exponents", {}) or {}
            unknown = set(exponents) - set(variables)
            if unknown:
                raise ValidationError(
                    f"champ '{where}[{k}].exponents': variables inconnues {sorted(unknown)}"
                )
            key = tuple(int(exponents.get(n, 0)) for n in variables)
            try:
                terms[key] = terms.get(key, 0.0) + float(entry["coeff"])
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"champ '{where}[{k}].coeff': réel attendu") from exc
        return cls(tuple(variables), terms)


@dataclass(frozen=True, eq=False)
class CdeSpec:
    """A constrained differential equation (V, X): a family and the slow field g."""

    family: CatastropheFamily
    g: Tuple[PolynomialMap, ...]
    degree_cap: int = 6
    name: str = ""
    g_at_origin: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        g = tuple(self.g)
        if len(g) != self.family.slow_dim:
            raise DimensionError(
                f"{self.family.name}: {self.family.slow_dim} composantes de X attendues, reçu {len(g)}"
            )
        for i, component in enumerate(g):
            if component.variables != self.family.variable_names:
                raise ValidationError(
                    f"g[{i}]: variables {component.variables} != {self.family.variable_names}"
                )
            if component.degree > self.degree_cap:
                raise ValidationError(
                    f"g[{i}]: degré {component.degree} supérieur au plafond {self.degree_cap}"
                )
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "g_at_origin", np.array([c.constant for c in g], dtype=float))

    @property
    def potential_sign(self) -> int:
        return self.family.sign

    def slow_field(self, p: TotalPoint) -> np.ndarray:
        """X(p) = (g_1(p), ..., g_m(p))."""
        values = p.vector
        return np.array([component(values) for component in self.g], dtype=float)

    def slow_field_sympy(self) -> List[sp.Expr]:
        fast, slow = family_symbols(self.family)
        return [component.to_sympy(fast + slow) for component in self.g]

    @classmethod
    def from_expressions(
        cls,
        family: CatastropheFamily,
        expressions: Sequence[Union[str, sp.Expr, float]],
        name: str = "",
        degree_cap: Optional[int] = None,
    ) -> "CdeSpec":
        fast, slow = family_symbols(family)
        symbols = fast + slow
        local = {s.name: s for s in symbols}
        g = []
        for i, expr in enumerate(expressions):
            try:
                parsed = sp.sympify(expr, locals=local) if isinstance(expr, str) else sp.sympify(expr)
            except (sp.SympifyError, TypeError) as exc:
                raise ValidationError(f"champ 'g[{i}]': expression illisible {expr!r}") from exc
            stray = {s.name for s in parsed.free_symbols} - set(local)
            if stray:
                raise ValidationError(f"champ 'g[{i}]': symboles inconnus {sorted(stray)}")
            g.append(PolynomialMap.from_sympy(parsed, symbols))
        cap = get_config().degree_cap if degree_cap is None else degree_cap
        return cls(family, tuple(g), degree_cap=cap, name=name)

    def to_json(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "family": self.family.name,
            "slow_dim": self.family.slow_dim,
            "potential_sign": self.family.sign,
            "g": [component.to_json() for component in self.g],
        }
        if self.name:
            payload["name"] = self.name
        return payload

    @classmethod
    def from_json(cls, payload: Any, degree_cap: Optional[int] = None) -> "CdeSpec":
        if not isinstance(payload, dict):
            raise ValidationError("spec: objet JSON attendu")
        if "family" not in payload:
            raise ValidationError("champ 'family' manquant")
        if "g" not in payload or not isinstance(payload["g"], list):
            raise ValidationError("champ 'g' manquant ou non liste")
        family = CatastropheFamily.from_name(
            str(payload["family"]),
            slow_dim=payload.get("slow_dim", len(payload["g"])),
            sign=int(payload.get("potential_sign", 1)),
        )
        cap = get_config().degree_cap if degree_cap is None else degree_cap
        name = str(payload.get("name", ""))
        if all(isinstance(entry, str) for entry in payload["g"]):
            return cls.from_expressions(family, payload["g"], name=name, degree_cap=cap)
        g = tuple(
            PolynomialMap.from_json(entries, family.variable_names, where=f"g[{i}]")
            for i, entries in enumerate(payload["g"])
        )
        return cls(family, g, degree_cap=cap, name=name)


def projection_restricted(family: CatastropheFamily, chart: ChartPoint) -> np.ndarray:
    return lift_to_constraint(family, chart).slow


def jacobian_projection(family: CatastropheFamily, chart: ChartPoint) -> np.ndarray:
    """Analytic Jacobian of pi~ with respect to the chart coordinates.

    A parameter kept as chart coordinate contributes an identity row; a
    linear-term parameter ``l_i = -dV/dx_i`` contributes ``-d2V/dx_i dx_j``
    along fast coordinates and ``-d2V/dx_i dalpha_k`` along kept parameters.
    """
    point = lift_to_constraint(family, chart)
    names = family.chart_names
    fast_names, slow_names = family.fast_names, family.slow_names
    linear = linear_parameters(family)
    hess = family.sign * hessian_fast(family, point)
    mixed = mixed_derivatives(family, point)
    m = family.slow_dim
    jac = np.zeros((m, m))
    for k, pname in enumerate(slow_names):
        if k not in linear:
            jac[k, names.index(pname)] = 1.0
            continue
        i = linear.index(k)
        for col, cname in enumerate(names):
            if cname in fast_names:
                jac[k, col] = -hess[i, fast_names.index(cname)]
            else:
                jac[k, col] = -mixed[i, slow_names.index(cname)]
    return jac


def projection_determinant(family: CatastropheFamily, chart: ChartPoint) -> float:
    return float(np.linalg.det(jacobian_projection(family, chart)))


def adjugate(matrix: np.ndarray) -> np.ndarray:
    """Transpose of the cofactor matrix; smooth even where det = 0."""
    matrix = np.asarray(matrix, dtype=float)
    m = matrix.shape[0]
    if m == 1:
        return np.ones((1, 1))
    cofactors = np.empty_like(matrix)
    for i in range(m):
        for j in range(m):
            minor = np.delete(np.delete(matrix, i, axis=0), j, axis=1)
            cofactors[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return cofactors.T


def desingularized_field_generic(spec: CdeSpec, chart: ChartPoint) -> ChartVector:
    family = spec.family
    point = lift_to_constraint(family, chart)
    return adjugate(jacobian_projection(family, chart)) @ spec.slow_field(point)


def desingularized_field_closed(spec: CdeSpec, chart: ChartPoint) -> ChartVector:
    """Closed forms for the swallowtail and the umbilics, in charts (a,b,x) and (a,x,y)."""
    family = spec.family
    tag = family.tag
    if tag not in CLOSED_FORM_ORIENTATION:
        raise ValidationError(f"pas de forme fermée pour la famille {family.name}")
    point = lift_to_constraint(family, chart)
    f_a, f_b, f_c = spec.slow_field(point)
    values = chart.as_dict()
    a, x = values["a"], values["x"]
    if tag is FamilyTag.SWALLOWTAIL:
        b = values["b"]
        h = 4 * x**3 + 2 * a * x + b
        field_ = np.array([-h * f_a, -h * f_b, x**2 * f_a + x * f_b + f_c])
    elif tag is FamilyTag.ELLIPTIC_UMBILIC:
        y = values["y"]
        field_ = np.array(
            [
                (4 * a**2 - 36 * x**2 - 36 * y**2) * f_a,
                (12 * x**2 - 4 * a * x - 12 * y**2) * f_a + (6 * x - 2 * a) * f_b - 6 * y * f_c,
                -4 * y * (a + 6 * x) * f_a - 6 * y * f_b - (2 * a + 6 * x) * f_c,
            ]
        )
    else:
        y = values["y"]
        field_ = np.array(
            [
                (36 * x * y - a**2) * f_a,
                (a * x - 6 * y**2) * f_a - 6 * y * f_b + a * f_c,
                (a * y - 6 * x**2) * f_a + a * f_b - 6 * x * f_c,
            ]
        )
    return CLOSED_FORM_ORIENTATION[tag] * field_


def pushforward_residual(spec: CdeSpec, chart: ChartPoint) -> float:
    """Relative residual of d pi~ . Xbar = det(d pi~) . X."""
    family = spec.family
    jac = jacobian_projection(family, chart)
    lhs = jac @ desingularized_field_generic(spec, chart)
    rhs = np.linalg.det(jac) * spec.slow_field(lift_to_constraint(family, chart))
    scale = 1.0 + max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    return float(np.max(np.abs(lhs - rhs))) / scale
