"""
Thom-Boardman strata of the catastrophe families.

Appartenance aux strates (régulier, pli, fronce, queue d'aronde, ombilic)
par chaînes de dérivées qui s'annulent, et échantillonnage exact de chaque
strate par une paramétrisation explicite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .base import PreconditionError, ValidationError
from .config import get_config
from .potentials import (
    CatastropheFamily,
    FamilyTag,
    TotalPoint,
    fast_derivative,
    grad_fast,
    hessian_fast,
    third_derivative_tensor,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class StratumLabel:
    symbol: Tuple[int, ...]
    name: str

    def __post_init__(self) -> None:
        if any(later > earlier for earlier, later in zip(self.symbol, self.symbol[1:])):
            raise ValidationError(f"symbole {self.symbol} non décroissant")

    def __str__(self) -> str:
        return "Sigma^" + ",".join(str(i) for i in self.symbol)

    def to_dict(self) -> Dict[str, object]:
        return {"symbol": list(self.symbol), "name": self.name}


REGULAR = StratumLabel((1, 0), "regular")
FOLD = StratumLabel((1, 1, 0), "fold")
CUSP = StratumLabel((1, 1, 1, 0), "cusp")
SWALLOWTAIL_POINT = StratumLabel((1, 1, 1, 1), "swallowtail_point")

UMBILIC_REGULAR = StratumLabel((2, 0), "regular")
UMBILIC_FOLD = StratumLabel((2, 1, 0), "fold")
UMBILIC_CUSP = StratumLabel((2, 1, 1, 0), "cusp")
UMBILIC_POINT = StratumLabel((2, 2, 0), "umbilic_point")

_CORANK_ONE_CHAIN = (REGULAR, FOLD, CUSP, SWALLOWTAIL_POINT)


def supported_strata(family: CatastropheFamily) -> Tuple[StratumLabel, ...]:
    tag = family.tag
    if tag is FamilyTag.MORSE:
        return (REGULAR,)
    if tag is FamilyTag.FOLD:
        return (REGULAR, FOLD)
    if tag is FamilyTag.CUSP:
        return (REGULAR, FOLD, CUSP)
    if tag is FamilyTag.SWALLOWTAIL:
        return _CORANK_ONE_CHAIN
    if tag in (FamilyTag.HYPERBOLIC_UMBILIC, FamilyTag.ELLIPTIC_UMBILIC):
        return (UMBILIC_REGULAR, UMBILIC_FOLD, UMBILIC_CUSP, UMBILIC_POINT)
    raise ValidationError(f"strates non disponibles pour la famille {family.name}")


def stratum_dimension(family: CatastropheFamily, label: StratumLabel) -> int:
    """Dimension of the stratum inside the total space (S_V has dimension slow_dim)."""
    strata = supported_strata(family)
    if label not in strata:
        raise ValidationError(f"strate {label} inconnue pour {family.name}")
    return family.slow_dim - strata.index(label)


def _require_on_constraint(family: CatastropheFamily, p: TotalPoint, tol: float) -> None:
    residual = float(np.max(np.abs(grad_fast(family, p))))
    scale = 1.0 + float(np.max(np.abs(p.vector))) ** 2
    if residual > tol * scale:
        raise PreconditionError(f"point hors de S_V (|grad| = {residual:.3e})")


def _kernel_cubic(family: CatastropheFamily, p: TotalPoint) -> Tuple[float, float, np.ndarray]:
    """Smallest Hessian eigenvalue, the cubic term along its eigenvector, and the spectrum."""
    eigenvalues, vectors = np.linalg.eigh(hessian_fast(family, p))
    index = int(np.argmin(np.abs(eigenvalues)))
    v = vectors[:, index]
    cubic = float(np.einsum("ijk,i,j,k->", third_derivative_tensor(family, p), v, v, v))
    return float(eigenvalues[index]), cubic, eigenvalues


def stratum_of(family: CatastropheFamily, p: TotalPoint, tol: Optional[float] = None) -> StratumLabel:
    """Stratum of a point of S_V."""
    tol = get_config().strata_tol if tol is None else tol
    strata = supported_strata(family)
    _require_on_constraint(family, p, tol)

    if family.fast_dim == 1:
        top = len(strata) + 1
        derivatives = [abs(fast_derivative(family, p, k)) for k in range(2, top + 1)]
        threshold = tol * max(1.0, max(derivatives))
        for label, value in zip(strata, derivatives):
            if value > threshold:
                return label
        return strata[-1]

    hessian = hessian_fast(family, p)
    third = third_derivative_tensor(family, p)
    threshold = tol * max(1.0, float(np.max(np.abs(hessian))), float(np.max(np.abs(third))))
    smallest, cubic, eigenvalues = _kernel_cubic(family, p)
    corank = int(np.sum(np.abs(eigenvalues) <= threshold))
    if corank == 0:
        return UMBILIC_REGULAR
    if corank == 2:
        return UMBILIC_POINT
    return UMBILIC_CUSP if abs(cubic) <= threshold else UMBILIC_FOLD


def defining_residuals(family: CatastropheFamily, p: TotalPoint, depth: int) -> np.ndarray:
    """Residuals of the equations cutting out the stratum of the given depth.

    depth 1 is S_V, 2 the singular set B, 3 the cusps and 4 the most
    degenerate point of the family. For the umbilics the point is cut out
    by the whole Hessian, not by the cubic along a kernel direction.
    """
    if depth < 1 or depth > 4:
        raise ValidationError("depth doit être entre 1 et 4")
    residuals = list(np.abs(grad_fast(family, p)))
    if family.fast_dim == 1:
        residuals += [abs(fast_derivative(family, p, k)) for k in range(2, depth + 1)]
        return np.asarray(residuals, dtype=float)
    if depth >= 2:
        residuals.append(abs(float(np.linalg.det(hessian_fast(family, p)))))
    if depth == 3:
        residuals.append(abs(_kernel_cubic(family, p)[1]))
    if depth == 4:
        residuals.append(float(np.max(np.abs(hessian_fast(family, p)))))
    return np.asarray(residuals, dtype=float)


# ---------------------------------------------------------------------------
# Explicit parametrizations
# ---------------------------------------------------------------------------

Sampler = Callable[[np.random.Generator], np.ndarray]
Parametrization = Callable[[np.ndarray], TotalPoint]


@dataclass(frozen=True, slots=True)
class _Chart:
    dimension: int
    sampler: Sampler
    mapping: Parametrization


def _free(rng: np.random.Generator, count: int) -> np.ndarray:
    return rng.uniform(-1.5, 1.5, size=count)


def _away_from_zero(rng: np.random.Generator, low: float = 0.2, high: float = 1.5) -> float:
    return float(rng.choice([-1.0, 1.0]) * rng.uniform(low, high))


def _corank_one_charts(family: CatastropheFamily) -> Dict[StratumLabel, _Chart]:
    tag = family.tag
    m = family.slow_dim

    def total(x: float, slow: Sequence[float]) -> TotalPoint:
        return TotalPoint([x], slow)

    if tag is FamilyTag.MORSE:
        return {REGULAR: _Chart(m, lambda rng: _free(rng, m), lambda q: total(0.0, q))}

    if tag is FamilyTag.FOLD:
        extra = m - 1

        def regular(rng: np.random.Generator) -> np.ndarray:
            return np.concatenate([[_away_from_zero(rng)], _free(rng, extra)])

        return {
            REGULAR: _Chart(m, regular, lambda q: total(q[0], [-q[0] ** 2, *q[1:]])),
            FOLD: _Chart(extra, lambda rng: _free(rng, extra), lambda q: total(0.0, [0.0, *q])),
        }

    if tag is FamilyTag.CUSP:
        extra = m - 2

        def cusp_regular(rng: np.random.Generator) -> np.ndarray:
            while True:
                q = _free(rng, m)
                if abs(3 * q[0] ** 2 + q[1]) > 0.05:
                    return q

        def fold_sample(rng: np.random.Generator) -> np.ndarray:
            return np.concatenate([[_away_from_zero(rng, 0.1, 1.0)], _free(rng, extra)])

        return {
            REGULAR: _Chart(
                m, cusp_regular, lambda q: total(q[0], [q[1], -q[0] ** 3 - q[1] * q[0], *q[2:]])
            ),
            FOLD: _Chart(
                1 + extra, fold_sample, lambda q: total(q[0], [-3 * q[0] ** 2, 2 * q[0] ** 3, *q[1:]])
            ),
            CUSP: _Chart(extra, lambda rng: _free(rng, extra), lambda q: total(0.0, [0.0, 0.0, *q])),
        }

    # swallowtail: V = x^5/5 + a x^3/3 + b x^2/2 + c x
    def sw_regular(rng: np.random.Generator) -> np.ndarray:
        while True:
            a, b, x = _free(rng, 3)
            if abs(4 * x**3 + 2 * a * x + b) > 0.05:
                return np.array([a, b, x])

    def sw_fold(rng: np.random.Generator) -> np.ndarray:
        while True:
            x, a = _free(rng, 2)
            if abs(12 * x**2 + 2 * a) > 0.1:
                return np.array([x, a])

    return {
        REGULAR: _Chart(
            3,
            sw_regular,
            lambda q: total(q[2], [q[0], q[1], -(q[2] ** 4 + q[0] * q[2] ** 2 + q[1] * q[2])]),
        ),
        FOLD: _Chart(
            2,
            sw_fold,
            lambda q: total(q[0], [q[1], -4 * q[0] ** 3 - 2 * q[1] * q[0], 3 * q[0] ** 4 + q[1] * q[0] ** 2]),
        ),
        CUSP: _Chart(
            1,
            lambda rng: np.array([_away_from_zero(rng, 0.1, 1.0)]),
            lambda q: total(q[0], [-6 * q[0] ** 2, 8 * q[0] ** 3, -3 * q[0] ** 4]),
        ),
        SWALLOWTAIL_POINT: _Chart(0, lambda rng: np.empty(0), lambda q: total(0.0, [0.0, 0.0, 0.0])),
    }


def _umbilic_lift(tag: FamilyTag, a: float, x: float, y: float) -> TotalPoint:
    if tag is FamilyTag.HYPERBOLIC_UMBILIC:
        b, c = -3 * x**2 - a * y, -3 * y**2 - a * x
    else:
        b, c = -3 * x**2 + 3 * y**2 - 2 * a * x, 6 * x * y - 2 * a * y
    return TotalPoint([x, y], [a, b, c])


# Directions of the three cusp lines of the elliptic umbilic, (x, y) = (a/3)(cos, sin)
EU_CUSP_ANGLES = (0.0, 2 * np.pi / 3, 4 * np.pi / 3)


def _umbilic_charts(family: CatastropheFamily) -> Dict[StratumLabel, _Chart]:
    tag = family.tag
    hyperbolic = tag is FamilyTag.HYPERBOLIC_UMBILIC

    def det(a: float, x: float, y: float) -> float:
        return 36 * x * y - a**2 if hyperbolic else 4 * a**2 - 36 * x**2 - 36 * y**2

    def regular(rng: np.random.Generator) -> np.ndarray:
        while True:
            q = _free(rng, 3)
            if abs(det(*q)) > 0.05:
                return q

    if hyperbolic:

        def fold(rng: np.random.Generator) -> np.ndarray:
            while True:
                a, x = _away_from_zero(rng), _away_from_zero(rng)
                if abs(x - a / 6) > 0.05:
                    return np.array([a, x])

        fold_map = lambda q: _umbilic_lift(tag, q[0], q[1], q[0] ** 2 / (36 * q[1]))  # noqa: E731
        cusp = _Chart(
            1,
            lambda rng: np.array([_away_from_zero(rng)]),
            lambda q: _umbilic_lift(tag, q[0], q[0] / 6, q[0] / 6),
        )
    else:

        def fold(rng: np.random.Generator) -> np.ndarray:
            while True:
                a, theta = _away_from_zero(rng), rng.uniform(0.0, 2 * np.pi)
                gaps = [abs(np.angle(np.exp(1j * (theta - phi)))) for phi in EU_CUSP_ANGLES]
                if min(gaps) > 0.05:
                    return np.array([a, theta])

        fold_map = lambda q: _umbilic_lift(  # noqa: E731
            tag, q[0], q[0] / 3 * np.cos(q[1]), q[0] / 3 * np.sin(q[1])
        )

        def cusp_sample(rng: np.random.Generator) -> np.ndarray:
            return np.array([_away_from_zero(rng), float(rng.choice(EU_CUSP_ANGLES))])

        cusp = _Chart(
            1,
            cusp_sample,
            lambda q: _umbilic_lift(tag, q[0], q[0] / 3 * np.cos(q[1]), q[0] / 3 * np.sin(q[1])),
        )

    return {
        UMBILIC_REGULAR: _Chart(3, regular, lambda q: _umbilic_lift(tag, *q)),
        UMBILIC_FOLD: _Chart(2, fold, fold_map),
        UMBILIC_CUSP: cusp,
        UMBILIC_POINT: _Chart(0, lambda rng: np.empty(0), lambda q: _umbilic_lift(tag, 0.0, 0.0, 0.0)),
    }


def _charts(family: CatastropheFamily) -> Dict[StratumLabel, _Chart]:
    supported_strata(family)
    if family.fast_dim == 2:
        return _umbilic_charts(family)
    return _corank_one_charts(family)


def _chart_for(family: CatastropheFamily, label: StratumLabel) -> _Chart:
    charts = _charts(family)
    if label not in charts:
        raise ValidationError(f"strate {label} ({label.name}) inconnue pour {family.name}")
    return charts[label]


def sample_stratum(
    family: CatastropheFamily,
    label: StratumLabel,
    count: int,
    rng: Optional[np.random.Generator] = None,
) -> List[TotalPoint]:
    """Points exactly on the stratum; a 0-dimensional stratum yields its single point."""
    if count < 1:
        raise ValidationError("count doit être >= 1")
    chart = _chart_for(family, label)
    if chart.dimension == 0:
        return [chart.mapping(np.empty(0))]
    rng = rng if rng is not None else np.random.default_rng(get_config().seed)
    return [chart.mapping(chart.sampler(rng)) for _ in range(count)]


def parametrization_rank(
    family: CatastropheFamily, label: StratumLabel, rng: Optional[np.random.Generator] = None, h: float = 1e-6
) -> int:
    """Numerical rank of the parametrization Jacobian at a random parameter point."""
    chart = _chart_for(family, label)
    if chart.dimension == 0:
        return 0
    rng = rng if rng is not None else np.random.default_rng(get_config().seed)
    q = chart.sampler(rng)
    columns = []
    for k in range(chart.dimension):
        step = np.zeros_like(q)
        step[k] = h
        columns.append((chart.mapping(q + step).vector - chart.mapping(q - step).vector) / (2 * h))
    return int(np.linalg.matrix_rank(np.column_stack(columns), tol=1e-6))


def sample_catastrophe_set(
    family: CatastropheFamily, count: int, rng: Optional[np.random.Generator] = None
) -> pd.DataFrame:
    """Samples of B per stratum with their image in parameter space (the catastrophe set)."""
    rng = rng if rng is not None else np.random.default_rng(get_config().seed)
    rows = []
    for label in supported_strata(family)[1:]:
        for point in sample_stratum(family, label, count, rng):
            row = point.as_dict(family)
            row["stratum"] = label.name
            row["symbol"] = str(label)
            rows.append(row)
    columns = list(family.slow_names) + list(family.fast_names) + ["stratum", "symbol"]
    frame = pd.DataFrame(rows, columns=columns)
    logger.debug("%s: %d points sur l'ensemble catastrophe", family.name, len(frame))
    return frame
