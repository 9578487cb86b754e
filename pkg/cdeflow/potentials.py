"""
Elementary catastrophe potentials (Thom's seven families).

Évalue V(x, alpha), ses dérivées selon les variables rapides, et classe les
points par rapport à S_V, S_V,min et l'ensemble singulier B.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from numpy.polynomial import Polynomial

from .base import ChartError, DimensionError, ValidationError
from .config import get_config

SLOW_NAMES: Tuple[str, ...] = ("a", "b", "c", "d")


class FamilyTag(str, Enum):
    NON_CRITICAL = "non_critical"
    MORSE = "morse"
    FOLD = "fold"
    CUSP = "cusp"
    SWALLOWTAIL = "swallowtail"
    ELLIPTIC_UMBILIC = "elliptic_umbilic"
    HYPERBOLIC_UMBILIC = "hyperbolic_umbilic"
    BUTTERFLY = "butterfly"
    PARABOLIC_UMBILIC = "parabolic_umbilic"


UMBILICS = frozenset(
    {FamilyTag.ELLIPTIC_UMBILIC, FamilyTag.HYPERBOLIC_UMBILIC, FamilyTag.PARABOLIC_UMBILIC}
)

_CODIMENSION: Dict[FamilyTag, int] = {
    FamilyTag.NON_CRITICAL: 0,
    FamilyTag.MORSE: 0,
    FamilyTag.FOLD: 1,
    FamilyTag.CUSP: 2,
    FamilyTag.SWALLOWTAIL: 3,
    FamilyTag.ELLIPTIC_UMBILIC: 3,
    FamilyTag.HYPERBOLIC_UMBILIC: 3,
    FamilyTag.BUTTERFLY: 4,
    FamilyTag.PARABOLIC_UMBILIC: 4,
}

# (min, max, default) number of slow parameters; low-codimension families may be padded
_SLOW_DIM: Dict[FamilyTag, Tuple[int, int, int]] = {
    FamilyTag.NON_CRITICAL: (0, 3, 3),
    FamilyTag.MORSE: (0, 3, 3),
    FamilyTag.FOLD: (1, 3, 1),
    FamilyTag.CUSP: (2, 3, 2),
    FamilyTag.SWALLOWTAIL: (3, 3, 3),
    FamilyTag.ELLIPTIC_UMBILIC: (3, 3, 3),
    FamilyTag.HYPERBOLIC_UMBILIC: (3, 3, 3),
    FamilyTag.BUTTERFLY: (4, 4, 4),
    FamilyTag.PARABOLIC_UMBILIC: (4, 4, 4),
}

# Index of the slow parameter multiplying each fast variable linearly
_LINEAR_PARAMS: Dict[FamilyTag, Tuple[int, ...]] = {
    FamilyTag.FOLD: (0,),
    FamilyTag.CUSP: (1,),
    FamilyTag.SWALLOWTAIL: (2,),
    FamilyTag.ELLIPTIC_UMBILIC: (1, 2),
    FamilyTag.HYPERBOLIC_UMBILIC: (1, 2),
    FamilyTag.BUTTERFLY: (3,),
    FamilyTag.PARABOLIC_UMBILIC: (2, 3),
}


def _chart_names(tag: FamilyTag, slow_dim: int) -> Tuple[str, ...]:
    slow = SLOW_NAMES[:slow_dim]
    if tag is FamilyTag.MORSE:
        return slow
    if tag is FamilyTag.FOLD:
        return ("x",) + slow[1:]
    if tag is FamilyTag.CUSP:
        return ("x", "a") + slow[2:]
    if tag is FamilyTag.SWALLOWTAIL:
        return ("a", "b", "x")
    if tag in (FamilyTag.ELLIPTIC_UMBILIC, FamilyTag.HYPERBOLIC_UMBILIC):
        return ("a", "x", "y")
    if tag is FamilyTag.BUTTERFLY:
        return ("a", "b", "c", "x")
    if tag is FamilyTag.PARABOLIC_UMBILIC:
        return ("a", "b", "x", "y")
    raise ChartError(f"la famille {tag.value} n'a pas de point critique, donc pas de carte sur S_V")


@dataclass(frozen=True, slots=True)
class CatastropheFamily:
    """One row of Thom's table, with its dimensions and the sign of V.

    ``sign = -1`` selects the dual potential ``-V`` (dual cusp), which swaps
    the attracting and repelling parts of S_V.
    """

    tag: FamilyTag
    slow_dim: Optional[int] = None
    sign: int = 1

    def __post_init__(self) -> None:
        tag = FamilyTag(self.tag)
        object.__setattr__(self, "tag", tag)
        low, high, default = _SLOW_DIM[tag]
        slow_dim = default if self.slow_dim is None else int(self.slow_dim)
        if not low <= slow_dim <= high:
            raise DimensionError(
                f"{tag.value}: slow_dim={slow_dim} hors de l'intervalle [{low}, {high}]"
            )
        object.__setattr__(self, "slow_dim", slow_dim)
        if self.sign not in (1, -1):
            raise ValidationError(f"signe du potentiel invalide: {self.sign!r} (attendu ±1)")

    @classmethod
    def from_name(cls, name: str, slow_dim: Optional[int] = None, sign: int = 1) -> "CatastropheFamily":
        try:
            tag = FamilyTag(name.strip().lower())
        except ValueError as exc:
            known = ", ".join(t.value for t in FamilyTag)
            raise ValidationError(f"famille inconnue {name!r} (connues: {known})") from exc
        return cls(tag, slow_dim, sign)

    @property
    def name(self) -> str:
        return self.tag.value

    @property
    def fast_dim(self) -> int:
        return 2 if self.tag in UMBILICS else 1

    @property
    def codimension(self) -> int:
        return _CODIMENSION[self.tag]

    @property
    def fast_names(self) -> Tuple[str, ...]:
        return ("x", "y") if self.fast_dim == 2 else ("x",)

    @property
    def slow_names(self) -> Tuple[str, ...]:
        return SLOW_NAMES[: self.slow_dim]

    @property
    def variable_names(self) -> Tuple[str, ...]:
        return self.fast_names + self.slow_names

    @property
    def chart_names(self) -> Tuple[str, ...]:
        return _chart_names(self.tag, self.slow_dim)

    @property
    def is_umbilic(self) -> bool:
        return self.tag in UMBILICS

    @property
    def supports_dynamics(self) -> bool:
        """Families handled by the desingularization and integration modules."""
        return self.tag is not FamilyTag.NON_CRITICAL and self.codimension <= 3 and self.slow_dim >= 1

    def to_dict(self) -> Dict[str, object]:
        return {"family": self.name, "slow_dim": self.slow_dim, "potential_sign": self.sign}


@dataclass(frozen=True, slots=True, eq=False)
class TotalPoint:
    """A point (x, alpha) of the total space."""

    fast: np.ndarray
    slow: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "fast", np.atleast_1d(np.asarray(self.fast, dtype=float)).copy())
        object.__setattr__(self, "slow", np.atleast_1d(np.asarray(self.slow, dtype=float)).copy())

    @classmethod
    def from_mapping(cls, family: CatastropheFamily, values: Mapping[str, float]) -> "TotalPoint":
        missing = [n for n in family.variable_names if n not in values]
        if missing:
            raise DimensionError(f"coordonnées manquantes pour {family.name}: {missing}")
        return cls([values[n] for n in family.fast_names], [values[n] for n in family.slow_names])

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.fast, self.slow])

    def with_fast(self, fast: Sequence[float]) -> "TotalPoint":
        return TotalPoint(fast, self.slow)

    def as_dict(self, family: CatastropheFamily) -> Dict[str, float]:
        return {name: float(v) for name, v in zip(family.variable_names, self.vector)}

    def __repr__(self) -> str:
        return f"TotalPoint(fast={self.fast.tolist()}, slow={self.slow.tolist()})"


@dataclass(frozen=True, slots=True, eq=False)
class ChartPoint:
    """Coordinates on S_V in the family chart (fast variables + free parameters)."""

    family: CatastropheFamily
    coords: np.ndarray

    def __post_init__(self) -> None:
        coords = np.atleast_1d(np.asarray(self.coords, dtype=float)).copy()
        expected = len(self.family.chart_names)
        if coords.shape != (expected,):
            raise DimensionError(
                f"carte {self.family.name}: {expected} coordonnées attendues "
                f"{self.family.chart_names}, reçu {coords.shape}"
            )
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_mapping(cls, family: CatastropheFamily, values: Mapping[str, float]) -> "ChartPoint":
        names = family.chart_names
        unknown = set(values) - set(names)
        if unknown:
            raise DimensionError(f"coordonnées hors carte {names}: {sorted(unknown)}")
        return cls(family, [float(values.get(n, 0.0)) for n in names])

    @property
    def names(self) -> Tuple[str, ...]:
        return self.family.chart_names

    def __getitem__(self, name: str) -> float:
        return float(self.coords[self.names.index(name)])

    def as_dict(self) -> Dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.coords)}

    def __repr__(self) -> str:
        return f"ChartPoint({self.family.name}, {self.as_dict()})"


class Attraction(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(slots=True)
class SetMembership:
    """Position of a point with respect to S_V, S_V,min and B."""

    on_constraint: bool
    attracting: Attraction
    singular: bool
    residual_constraint: float
    hessian_eigenvalues: np.ndarray

    @property
    def in_attracting_set(self) -> bool:
        return self.attracting is not Attraction.OUTSIDE

    def to_dict(self) -> Dict[str, object]:
        return {
            "on_constraint": self.on_constraint,
            "attracting": self.attracting.value,
            "singular": self.singular,
            "residual_constraint": float(self.residual_constraint),
            "hessian_eigenvalues": [float(v) for v in self.hessian_eigenvalues],
        }


# ---------------------------------------------------------------------------
# Potentials. Every implementation works on batches: fast arrays have shape
# (..., n) and results carry the same leading shape.
# ---------------------------------------------------------------------------


class _Potential:
    fast_dim = 1

    def value(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def third(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mixed(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        """d(dV/dx_i)/d(alpha_k), shape (n, m)."""
        raise NotImplementedError

    def symbolic(self, fast: Sequence[sp.Symbol], slow: Sequence[sp.Symbol]) -> sp.Expr:
        raise NotImplementedError


class _FibrePolynomial(_Potential):
    """Potential with one fast variable, seen as a polynomial in x."""

    def coefficients(self, alpha: Sequence) -> List:
        """Ascending coefficients in x; works with floats and sympy symbols."""
        raise NotImplementedError

    def x_polynomial(self, alpha: np.ndarray) -> Polynomial:
        return Polynomial(np.asarray([float(c) for c in self.coefficients(alpha)], dtype=float))

    def derivative(self, x: np.ndarray, alpha: np.ndarray, order: int) -> np.ndarray:
        poly = self.x_polynomial(alpha)
        return np.asarray(poly.deriv(order)(x) if order > 0 else poly(x), dtype=float)

    def value(self, x, alpha):
        return self.derivative(x[..., 0], alpha, 0)

    def gradient(self, x, alpha):
        return self.derivative(x[..., 0], alpha, 1)[..., None]

    def hessian(self, x, alpha):
        return self.derivative(x[..., 0], alpha, 2)[..., None, None]

    def third(self, x, alpha):
        return self.derivative(x[..., 0], alpha, 3)[..., None, None, None]

    def mixed(self, x, alpha):
        alpha = np.asarray(alpha, dtype=float)
        base = np.asarray([float(c) for c in self.coefficients(np.zeros_like(alpha))])
        columns = []
        for k in range(alpha.size):
            unit = np.zeros_like(alpha)
            unit[k] = 1.0
            shift = np.asarray([float(c) for c in self.coefficients(unit)]) - base
            columns.append(Polynomial(shift).deriv(1)(float(x[0])))
        return np.asarray(columns, dtype=float).reshape(1, alpha.size)

    def symbolic(self, fast, slow):
        x = fast[0]
        return sp.expand(sum(sp.sympify(c) * x**i for i, c in enumerate(self.coefficients(slow))))


class _NonCritical(_FibrePolynomial):
    def coefficients(self, alpha):
        return [0, 1]


class _Morse(_FibrePolynomial):
    def coefficients(self, alpha):
        return [0, 0, Fraction(1, 2)]


class _Fold(_FibrePolynomial):
    def coefficients(self, alpha):
        return [0, alpha[0], 0, Fraction(1, 3)]


class _Cusp(_FibrePolynomial):
    def coefficients(self, alpha):
        return [0, alpha[1], Fraction(1, 2) * alpha[0], 0, Fraction(1, 4)]


class _Swallowtail(_FibrePolynomial):
    def coefficients(self, alpha):
        a, b, c = alpha[0], alpha[1], alpha[2]
        return [0, c, Fraction(1, 2) * b, Fraction(1, 3) * a, 0, Fraction(1, 5)]


class _Butterfly(_FibrePolynomial):
    def coefficients(self, alpha):
        a, b, c, d = alpha[0], alpha[1], alpha[2], alpha[3]
        return [0, d, Fraction(1, 2) * c, Fraction(1, 3) * b, Fraction(1, 4) * a, 0, Fraction(1, 6)]


def _matrix(rows: Sequence[Sequence[np.ndarray]]) -> np.ndarray:
    return np.stack([np.stack(row, axis=-1) for row in rows], axis=-2)


def _tensor(x0: np.ndarray, entries: Mapping[Tuple[int, int, int], float]) -> np.ndarray:
    out = np.zeros(np.shape(x0) + (2, 2, 2))
    for (i, j, k), value in entries.items():
        out[..., i, j, k] = value
    return out


class _EllipticUmbilic(_Potential):
    fast_dim = 2

    def value(self, x, alpha):
        x0, y0 = x[..., 0], x[..., 1]
        a, b, c = alpha[:3]
        return x0**3 - 3 * x0 * y0**2 + a * (x0**2 + y0**2) + b * x0 + c * y0

    def gradient(self, x, alpha):
        x0, y0 = x[..., 0], x[..., 1]
        a, b, c = alpha[:3]
        return np.stack(
            [3 * x0**2 - 3 * y0**2 + 2 * a * x0 + b, -6 * x0 * y0 + 2 * a * y0 + c], axis=-1
        )

    def hessian(self, x, alpha):
        x0, y0 = x[..., 0], x[..., 1]
        a = alpha[0]
        return _matrix([[6 * x0 + 2 * a, -6 * y0], [-6 * y0, -6 * x0 + 2 * a]])

    def third(self, x, alpha):
        return _tensor(x[..., 0], {(0, 0, 0): 6.0, (0, 1, 1): -6.0, (1, 0, 1): -6.0, (1, 1, 0): -6.0})

    def mixed(self, x, alpha):
        return np.array([[2 * x[0], 1.0, 0.0], [2 * x[1], 0.0, 1.0]])

    def symbolic(self, fast, slow):
        x, y = fast
        a, b, c = slow[:3]
        return x**3 - 3 * x * y**2 + a * (x**2 + y**2) + b * x + c * y


class _HyperbolicUmbilic(_Potential):
    fast_dim = 2

    def value(self, x, alpha):
        x0, y0 = x[..., 0], x[..., 1]
        a, b, c = alpha[:3]
        return x0**3 + y0**3 + a * x0 * y0 + b * x0 + c * y0

    def gradient(self, x, alpha):
        x0, y0 = x[..., 0], x[..., 1]
        a, b, c = alpha[:3]
        return np.stack([3 * x0**2 + a * y0 + b, 3 * y0**2 + a * x0 + c], axis=-1)

    def hessian(self, x, alpha):
        x0, y0 = x[..., 0], x[..., 1]
        a = alpha[0] + np.zeros_like(x0)
        return _matrix([[6 * x0, a], [a, 6 * y0]])

    def third(self, x, alpha):
        return _tensor(x[..., 0], {(0, 0, 0): 6.0, (1, 1, 1): 6.0})

    def mixed(self, x, alpha):
        return np.array([[x[1], 1.0, 0.0], [x[0], 0.0, 1.0]])

    def symbolic(self, fast, slow):
        x, y = fast
        a, b, c = slow[:3]
        return x**3 + y**3 + a * x * y + b * x + c * y


class _ParabolicUmbilic(_Potential):
    fast_dim = 2

    def value(self, x, alpha):
        x0, y0 = x[..., 0], x[..., 1]
        a, b, c, d = alpha[:4]
        return x0**2 * y0 + y0**4 + a * x0**2 + b * y0**2 + c * x0 + d * y0

    def gradient(self, x, alpha):
        x0, y0 = x[..., 0], x[..., 1]
        a, b, c, d = alpha[:4]
        return np.stack([2 * x0 * y0 + 2 * a * x0 + c, x0**2 + 4 * y0**3 + 2 * b * y0 + d], axis=-1)

    def hessian(self, x, alpha):
        x0, y0 = x[..., 0], x[..., 1]
        a, b = alpha[0], alpha[1]
        return _matrix([[2 * y0 + 2 * a, 2 * x0], [2 * x0, 12 * y0**2 + 2 * b]])

    def third(self, x, alpha):
        out = _tensor(x[..., 0], {(0, 0, 1): 2.0, (0, 1, 0): 2.0, (1, 0, 0): 2.0})
        out[..., 1, 1, 1] = 24 * x[..., 1]
        return out

    def mixed(self, x, alpha):
        return np.array([[2 * x[0], 0.0, 1.0, 0.0], [0.0, 2 * x[1], 0.0, 1.0]])

    def symbolic(self, fast, slow):
        x, y = fast
        a, b, c, d = slow[:4]
        return x**2 * y + y**4 + a * x**2 + b * y**2 + c * x + d * y


_POTENTIALS: Dict[FamilyTag, _Potential] = {
    FamilyTag.NON_CRITICAL: _NonCritical(),
    FamilyTag.MORSE: _Morse(),
    FamilyTag.FOLD: _Fold(),
    FamilyTag.CUSP: _Cusp(),
    FamilyTag.SWALLOWTAIL: _Swallowtail(),
    FamilyTag.ELLIPTIC_UMBILIC: _EllipticUmbilic(),
    FamilyTag.HYPERBOLIC_UMBILIC: _HyperbolicUmbilic(),
    FamilyTag.BUTTERFLY: _Butterfly(),
    FamilyTag.PARABOLIC_UMBILIC: _ParabolicUmbilic(),
}


def potential_of(family: CatastropheFamily) -> _Potential:
    """Unsigned batch evaluator of the family potential."""
    return _POTENTIALS[family.tag]


def _check(family: CatastropheFamily, p: TotalPoint) -> None:
    if p.fast.shape != (family.fast_dim,) or p.slow.shape != (family.slow_dim,):
        raise DimensionError(
            f"{family.name}: point de dimensions ({p.fast.size}, {p.slow.size}), "
            f"attendu ({family.fast_dim}, {family.slow_dim})"
        )


def _padded(slow: np.ndarray) -> np.ndarray:
    """Slow vector completed with zeros so every implementation can index a..d."""
    if slow.size >= 4:
        return slow
    return np.concatenate([slow, np.zeros(4 - slow.size)])


def eval_potential(family: CatastropheFamily, p: TotalPoint) -> float:
    _check(family, p)
    return family.sign * float(potential_of(family).value(p.fast, _padded(p.slow)))


def grad_fast(family: CatastropheFamily, p: TotalPoint) -> np.ndarray:
    _check(family, p)
    return family.sign * np.asarray(potential_of(family).gradient(p.fast, _padded(p.slow)), dtype=float)


def hessian_fast(family: CatastropheFamily, p: TotalPoint) -> np.ndarray:
    _check(family, p)
    return family.sign * np.asarray(potential_of(family).hessian(p.fast, _padded(p.slow)), dtype=float)


def third_derivative_tensor(family: CatastropheFamily, p: TotalPoint) -> np.ndarray:
    _check(family, p)
    return family.sign * np.asarray(potential_of(family).third(p.fast, _padded(p.slow)), dtype=float)


def fast_derivative(family: CatastropheFamily, p: TotalPoint, order: int) -> float:
    """k-th derivative of V along x (one fast variable only)."""
    _check(family, p)
    pot = potential_of(family)
    if not isinstance(pot, _FibrePolynomial):
        raise DimensionError(f"{family.name}: dérivées successives définies pour une variable rapide")
    return family.sign * float(pot.derivative(p.fast[0], _padded(p.slow), order))


def fibre_polynomial(family: CatastropheFamily, slow: Sequence[float]) -> Polynomial:
    """Signed V(., alpha) as a polynomial in x, for one fast variable."""
    pot = potential_of(family)
    if not isinstance(pot, _FibrePolynomial):
        raise DimensionError(f"{family.name}: la fibre est bidimensionnelle")
    slow = np.asarray(slow, dtype=float)
    if slow.shape != (family.slow_dim,):
        raise DimensionError(f"{family.name}: {family.slow_dim} paramètres lents attendus")
    return family.sign * pot.x_polynomial(_padded(slow))


def mixed_derivatives(family: CatastropheFamily, p: TotalPoint) -> np.ndarray:
    """Unsigned d(grad V)/d(alpha), shape (n, slow_dim)."""
    _check(family, p)
    m = potential_of(family).mixed(p.fast, _padded(p.slow))
    return np.asarray(m, dtype=float)[:, : family.slow_dim]


@lru_cache(maxsize=None)
def family_symbols(family: CatastropheFamily) -> Tuple[Tuple[sp.Symbol, ...], Tuple[sp.Symbol, ...]]:
    fast = tuple(sp.Symbol(n, real=True) for n in family.fast_names)
    slow = tuple(sp.Symbol(n, real=True) for n in family.slow_names)
    return fast, slow


def symbolic_potential(family: CatastropheFamily) -> sp.Expr:
    """Signed V as a sympy expression in the family symbols."""
    fast, slow = family_symbols(family)
    padded = list(slow) + [sp.Integer(0)] * (4 - len(slow))
    return sp.expand(family.sign * potential_of(family).symbolic(fast, padded))


def classify_membership(
    family: CatastropheFamily, p: TotalPoint, tol: Optional[float] = None
) -> SetMembership:
    """Locate ``p`` against S_V (gradient), S_V,min and B (Hessian spectrum)."""
    tol = get_config().membership_tol if tol is None else tol
    if tol <= 0:
        raise ValidationError("tol doit être strictement positif")
    residual = float(np.max(np.abs(grad_fast(family, p))))
    eigenvalues = np.linalg.eigvalsh(hessian_fast(family, p))
    on_constraint = residual <= tol
    singular = bool(np.min(np.abs(eigenvalues)) <= tol)
    smallest = float(np.min(eigenvalues))
    if not on_constraint:
        attracting = Attraction.OUTSIDE
    elif smallest > tol:
        attracting = Attraction.INTERIOR
    elif smallest >= -tol:
        attracting = Attraction.BOUNDARY
    else:
        attracting = Attraction.OUTSIDE
    return SetMembership(on_constraint, attracting, singular, residual, eigenvalues)


def linear_parameters(family: CatastropheFamily) -> Tuple[int, ...]:
    """Indices of the slow parameters eliminated by the chart (coefficients of the linear terms)."""
    if family.tag is FamilyTag.NON_CRITICAL:
        raise ChartError("non_critical: V = x n'a pas de point critique")
    return _LINEAR_PARAMS.get(family.tag, ())


def lift_to_constraint(family: CatastropheFamily, chart: ChartPoint) -> TotalPoint:
    """Total point of S_V with the given chart coordinates."""
    if chart.family != family:
        raise ChartError(f"carte {chart.family.name} utilisée avec la famille {family.name}")
    linear = linear_parameters(family)
    values = dict(zip(family.chart_names, chart.coords))
    fast = np.array([values.get(n, 0.0) for n in family.fast_names])
    slow = np.array([values.get(n, 0.0) for n in family.slow_names])
    if linear:
        residual = potential_of(family).gradient(fast, _padded(slow))
        for i, index in enumerate(linear):
            slow[index] = -float(residual[i])
    return TotalPoint(fast, slow)


def chart_of(family: CatastropheFamily, p: TotalPoint) -> ChartPoint:
    """Chart coordinates of a point of S_V (inverse of the lift)."""
    _check(family, p)
    values = p.as_dict(family)
    return ChartPoint(family, [values[n] for n in family.chart_names])
