"""
Finite jumps at singular points of S_V.

Descente de gradient le long des fibres rapides, applications de saut
explicites (fronce, queue d'aronde) et recherche exhaustive des points
critiques d'une fibre pour vérifier l'absence de sauts des ombilics.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp
from scipy.optimize import root

from .base import CheckReport, JumpDomainError, PreconditionError, ValidationError
from .potentials import (
    Attraction,
    CatastropheFamily,
    FamilyTag,
    SetMembership,
    TotalPoint,
    classify_membership,
    eval_potential,
    family_symbols,
    fibre_polynomial,
    grad_fast,
    hessian_fast,
    potential_of,
    symbolic_potential,
)

logger = logging.getLogger(__name__)


class LandingOutcome(str, Enum):
    LANDED = "landed"
    DIVERGED = "diverged"
    ON_SINGULAR = "on_singular"


@dataclass(slots=True)
class DescentSettings:
    """Tolerances of the frozen-parameter gradient flow."""

    landing_tol: float = 1e-10
    switch_tol: float = 1e-7
    perturbation: float = 1e-6
    fast_bound: float = 50.0
    max_time: float = 1e10
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    psd_tol: float = 1e-9

    def __post_init__(self) -> None:
        for name in ("landing_tol", "switch_tol", "perturbation", "fast_bound", "max_time", "rel_tol", "abs_tol", "psd_tol"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"DescentSettings.{name} doit être > 0")


@dataclass(slots=True)
class LandingResult:
    outcome: LandingOutcome
    landing: Optional[TotalPoint]
    potential_drop: float
    path_samples: np.ndarray
    diagnostics: List[str] = field(default_factory=list)

    @property
    def landed(self) -> bool:
        return self.outcome is LandingOutcome.LANDED

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "landing_fast": None if self.landing is None else self.landing.fast.tolist(),
            "potential_drop": float(self.potential_drop),
            "samples": int(len(self.path_samples)),
            "diagnostics": list(self.diagnostics),
        }


@dataclass(slots=True)
class FibreCandidate:
    point: TotalPoint
    membership: SetMembership
    role: str
    potential: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fast": self.point.fast.tolist(),
            "role": self.role,
            "potential": float(self.potential),
            "attracting": self.membership.attracting.value,
            "singular": self.membership.singular,
        }


@dataclass(slots=True)
class JumpSearchReport:
    family: CatastropheFamily
    query: TotalPoint
    candidates: List[FibreCandidate]
    admissible: List[TotalPoint]
    report: CheckReport

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family.name,
            "query": self.query.as_dict(self.family),
            "candidates": [c.to_dict() for c in self.candidates],
            "admissible": [p.fast.tolist() for p in self.admissible],
            "checks": self.report.to_dict(),
        }


# ---------------------------------------------------------------------------
# Gradient flow along a fibre
# ---------------------------------------------------------------------------


def _polish(family: CatastropheFamily, point: TotalPoint, tol: float) -> Tuple[TotalPoint, float]:
    """Newton polish of a critical point of V(., alpha)."""
    alpha = point.slow

    def residual(z: np.ndarray) -> np.ndarray:
        return grad_fast(family, TotalPoint(z, alpha))

    def jacobian(z: np.ndarray) -> np.ndarray:
        return hessian_fast(family, TotalPoint(z, alpha))

    best = point
    best_norm = float(np.max(np.abs(residual(point.fast))))
    if best_norm <= tol:
        return best, best_norm
    sol = root(residual, point.fast, jac=jacobian, method="hybr", tol=1e-15)
    candidate = TotalPoint(sol.x, alpha)
    norm = float(np.max(np.abs(residual(sol.x))))
    if norm < best_norm and np.max(np.abs(sol.x - point.fast)) < 1e-3:
        best, best_norm = candidate, norm
    return best, best_norm


def fast_descent(
    family: CatastropheFamily, start: TotalPoint, settings: Optional[DescentSettings] = None
) -> LandingResult:
    """Follow x' = -dV/dx at frozen alpha from ``start`` down to a critical point."""
    settings = settings or DescentSettings()
    alpha = start.slow.copy()
    v_start = eval_potential(family, start)
    diagnostics: List[str] = []

    grad0 = grad_fast(family, start)
    if np.max(np.abs(grad0)) <= settings.landing_tol:
        eigen = np.linalg.eigvalsh(hessian_fast(family, start))
        if eigen.min() > 1e-4:
            return LandingResult(LandingOutcome.LANDED, start, 0.0, start.fast[None, :], ["départ déjà au minimum"])

    def rhs(_t: float, z: np.ndarray) -> np.ndarray:
        return -grad_fast(family, TotalPoint(z, alpha))

    def jac(_t: float, z: np.ndarray) -> np.ndarray:
        return -hessian_fast(family, TotalPoint(z, alpha))

    def near_critical(_t: float, z: np.ndarray) -> float:
        return float(np.linalg.norm(grad_fast(family, TotalPoint(z, alpha)))) - settings.switch_tol

    near_critical.terminal = True
    near_critical.direction = -1

    def escape(_t: float, z: np.ndarray) -> float:
        return settings.fast_bound - float(np.max(np.abs(z)))

    escape.terminal = True
    escape.direction = -1

    sol = solve_ivp(
        rhs,
        (0.0, settings.max_time),
        start.fast,
        method="LSODA",
        jac=jac,
        events=(near_critical, escape),
        rtol=settings.rel_tol,
        atol=settings.abs_tol,
    )
    samples = sol.y.T
    if sol.status == -1:
        diagnostics.append(f"échec de l'intégrateur: {sol.message}")
        return LandingResult(LandingOutcome.DIVERGED, None, 0.0, samples, diagnostics)
    if len(sol.t_events[1]):
        diagnostics.append(f"sortie de la boîte |x| <= {settings.fast_bound:g}")
        return LandingResult(LandingOutcome.DIVERGED, None, 0.0, samples, diagnostics)
    if not len(sol.t_events[0]):
        diagnostics.append(f"temps maximal {settings.max_time:g} épuisé sans point critique")
        return LandingResult(LandingOutcome.DIVERGED, None, 0.0, samples, diagnostics)

    landing, residual = _polish(family, TotalPoint(sol.y_events[0][0], alpha), settings.landing_tol)
    samples = np.vstack([samples, landing.fast[None, :]])
    drop = v_start - eval_potential(family, landing)
    if residual > settings.landing_tol:
        diagnostics.append(f"polissage incomplet: |grad| = {residual:.3e}")
    eigen = np.linalg.eigvalsh(hessian_fast(family, landing))
    logger.debug("descente %s: arrivée %s, chute %.3e, spectre %s", family.name, landing.fast, drop, eigen)
    if eigen.min() < -settings.psd_tol or residual > settings.landing_tol:
        return LandingResult(LandingOutcome.ON_SINGULAR, landing, max(drop, 0.0), samples, diagnostics)
    return LandingResult(LandingOutcome.LANDED, landing, max(drop, 0.0), samples, diagnostics)


def release_side(family: CatastropheFamily, q: TotalPoint, direction: np.ndarray, reach: float = 1e-3) -> float:
    """Sign s such that the fast flow started at q + s*h*direction moves away from q.

    g(h) + g(-h) - 2 g(0), with g(h) = grad(q + h d).d, is V'''h^2 up to O(h^4);
    the flow leaves q on the side where s V''' < 0. Returns 0.0 when this
    second difference sits at the rounding floor.
    """
    step = reach * direction
    g_plus = float(np.dot(grad_fast(family, q.with_fast(q.fast + step)), direction))
    g_minus = float(np.dot(grad_fast(family, q.with_fast(q.fast - step)), direction))
    g_zero = float(np.dot(grad_fast(family, q), direction))
    curvature = g_plus + g_minus - 2.0 * g_zero
    floor = 1e4 * np.finfo(float).eps * (1.0 + float(np.max(np.abs(q.vector)))) ** 4
    if abs(curvature) <= floor:
        return 0.0
    return -1.0 if curvature > 0 else 1.0


def perturb_off_singular(
    family: CatastropheFamily,
    q: TotalPoint,
    toward: Optional[np.ndarray] = None,
    magnitude: float = 1e-6,
) -> TotalPoint:
    """Shift ``q`` along the degenerate Hessian direction.

    Without ``toward`` the side is the one the fast flow leaves ``q`` from;
    when the cubic term vanishes the lower-potential side is kept.
    """
    eigenvalues, vectors = np.linalg.eigh(hessian_fast(family, q))
    direction = vectors[:, int(np.argmin(np.abs(eigenvalues)))]
    if toward is not None:
        side = float(np.dot(direction, np.asarray(toward, dtype=float) - q.fast))
        sign = 1.0 if side >= 0 else -1.0
        return q.with_fast(q.fast + sign * magnitude * direction)
    sign = release_side(family, q, direction)
    if sign != 0.0:
        return q.with_fast(q.fast + sign * magnitude * direction)
    plus = q.with_fast(q.fast + magnitude * direction)
    minus = q.with_fast(q.fast - magnitude * direction)
    return minus if eval_potential(family, minus) < eval_potential(family, plus) else plus


def resolve_jump(
    family: CatastropheFamily, q: TotalPoint, settings: Optional[DescentSettings] = None
) -> LandingResult:
    """Landing of the fast flow released from a singular point ``q``."""
    settings = settings or DescentSettings()
    start = perturb_off_singular(family, q, magnitude=settings.perturbation)
    result = fast_descent(family, start, settings)
    if result.landed and np.max(np.abs(result.landing.fast - q.fast)) <= 10 * settings.perturbation:
        result.outcome = LandingOutcome.ON_SINGULAR
        result.diagnostics.append("retour au point de départ: pas de saut fini")
    if result.landing is not None:
        # Jumps move along the fibre: slow coordinates copied bit for bit
        result.landing = TotalPoint(result.landing.fast, q.slow)
        result.potential_drop = max(eval_potential(family, q) - eval_potential(family, result.landing), 0.0)
    return result


# ---------------------------------------------------------------------------
# Closed-form jump maps
# ---------------------------------------------------------------------------


def _require_singular(family: CatastropheFamily, q: TotalPoint, tol: float) -> SetMembership:
    membership = classify_membership(family, q, tol=tol)
    if not (membership.on_constraint and membership.singular):
        raise PreconditionError(
            f"{family.name}: le point {q!r} n'est pas sur B "
            f"(|grad| = {membership.residual_constraint:.2e}, spectre = {membership.hessian_eigenvalues})"
        )
    return membership


def cusp_jump_map(q: TotalPoint, potential_sign: int = 1, tol: float = 1e-9) -> TotalPoint:
    """(x, a, b) -> (-2x, a, b) on the fold curve of the cusp."""
    family = CatastropheFamily(FamilyTag.CUSP, q.slow.size, potential_sign)
    _require_singular(family, q, tol)
    if potential_sign < 0:
        raise JumpDomainError("fronce duale: la fibre n'a pas d'autre minimum, pas de saut fini")
    return TotalPoint([-2.0 * q.fast[0]], q.slow)


def swallowtail_jump_domain(a: float, potential_sign: int = 1) -> Tuple[float, float, float]:
    """(lower, upper, cusp point) of the x-interval with finite jumps at parameter a < 0.

    The interval is open at ``lower``; ``upper`` is the zero-length boundary
    case and the cusp point is excluded.
    """
    if a >= 0:
        raise JumpDomainError(f"a = {a} >= 0: pas de saut fini pour la queue d'aronde")
    low, high, cusp = -np.sqrt(-a / 6.0), np.sqrt(-a / 2.0), np.sqrt(-a / 6.0)
    if potential_sign < 0:
        return -low, -high, -cusp
    return low, high, cusp


def swallowtail_jump_map(q: TotalPoint, potential_sign: int = 1, tol: float = 1e-9) -> TotalPoint:
    """x -> -x + s sqrt(-2x^2 - a) at fixed (a, b, c), s the potential sign."""
    family = CatastropheFamily(FamilyTag.SWALLOWTAIL, 3, potential_sign)
    _require_singular(family, q, tol)
    x, a = float(q.fast[0]), float(q.slow[0])
    low, high, cusp = swallowtail_jump_domain(a, potential_sign)
    radicand = -2.0 * x**2 - a
    if radicand < -tol:
        raise JumpDomainError(f"-2x^2 - a = {radicand:.3e} < 0: pas de saut fini")
    # u = s x brings the dual potential back to the s = +1 picture
    u, u_low, u_cusp = potential_sign * x, potential_sign * low, potential_sign * cusp
    if u <= u_low:
        raise JumpDomainError(f"x = {x} hors du domaine de saut ({low:.6g}, {high:.6g}): la descente diverge")
    if abs(u - u_cusp) <= tol:
        raise JumpDomainError("point de fronce: le saut est de longueur nulle")
    if radicand <= tol:
        logger.info("bord du domaine de saut (x = %s): saut de longueur nulle", x)
    landing = -x + potential_sign * np.sqrt(max(radicand, 0.0))
    return TotalPoint([landing], q.slow)


# ---------------------------------------------------------------------------
# Enumeration of fibre critical points
# ---------------------------------------------------------------------------


def _dedup(points: Sequence[np.ndarray], radius: float) -> List[np.ndarray]:
    kept: List[np.ndarray] = []
    for point in sorted(points, key=lambda p: tuple(np.round(p, 12))):
        if all(np.max(np.abs(point - other)) > radius for other in kept):
            kept.append(point)
    return kept


def _fibre_roots_1d(family: CatastropheFamily, slow: np.ndarray, report: CheckReport) -> List[np.ndarray]:
    poly = fibre_polynomial(family, slow).deriv(1)
    second = poly.deriv(1)
    roots = poly.roots()
    found = []
    for r in roots:
        if abs(r.imag) > 1e-6 * max(1.0, abs(r)):
            continue
        x = float(r.real)
        for _ in range(80):
            d = float(second(x))
            value = float(poly(x))
            if d == 0.0 or abs(value) < 1e-15:
                break
            step = value / d
            if not np.isfinite(step) or abs(step) > 1e-2:
                break
            x -= step
            if abs(step) < 1e-16 * max(1.0, abs(x)):
                break
        found.append(np.array([x]))
    if not found and poly.degree() % 2 == 1:
        report.add("error: aucune racine réelle trouvée pour un polynôme de degré impair")
    return _dedup(found, 1e-6)


@lru_cache(maxsize=None)
def _resultant_system(family: CatastropheFamily) -> Tuple[Callable, Callable, Callable]:
    """Lambdified eliminant in x and the two y-polynomials of the gradient system."""
    (x, y), slow = family_symbols(family)
    v = symbolic_potential(family)
    gx, gy = sp.diff(v, x), sp.diff(v, y)
    eliminant = sp.Poly(sp.resultant(gx, gy, y), x)
    logger.debug("résultant %s: degré %d en x", family.name, eliminant.degree())
    coeffs_x = sp.lambdify(slow, eliminant.all_coeffs(), "numpy")
    coeffs_gx = sp.lambdify((x,) + slow, sp.Poly(gx, y).all_coeffs(), "numpy")
    coeffs_gy = sp.lambdify((x,) + slow, sp.Poly(gy, y).all_coeffs(), "numpy")
    return coeffs_x, coeffs_gx, coeffs_gy


def _newton_grid_2d(
    family: CatastropheFamily, slow: np.ndarray, half_width: float, size: int = 64, iterations: int = 80
) -> List[np.ndarray]:
    pot = potential_of(family)
    alpha = np.concatenate([slow, np.zeros(4 - slow.size)])
    axis = np.linspace(-half_width, half_width, size)
    gx, gy = np.meshgrid(axis, axis)
    z = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    alive = np.ones(len(z), dtype=bool)
    for _ in range(iterations):
        g = family.sign * pot.gradient(z, alpha)
        h = family.sign * pot.hessian(z, alpha)
        det = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
        ok = alive & (np.abs(det) > 1e-300)
        safe = np.where(ok, det, 1.0)
        dx = (h[:, 1, 1] * g[:, 0] - h[:, 0, 1] * g[:, 1]) / safe
        dy = (-h[:, 1, 0] * g[:, 0] + h[:, 0, 0] * g[:, 1]) / safe
        z = np.where(ok[:, None], z - np.stack([dx, dy], axis=-1), z)
        alive &= np.all(np.isfinite(z), axis=1) & (np.max(np.abs(z), axis=1) < 1e3)
        z = np.where(alive[:, None], z, 0.0)
    g = family.sign * pot.gradient(z, alpha)
    scale = 1.0 + np.max(np.abs(slow))
    converged = alive & (np.max(np.abs(g), axis=1) <= 1e-10 * scale)
    inside = np.max(np.abs(z), axis=1) <= half_width * (1 + 1e-9)
    return _dedup(list(z[converged & inside]), 1e-6)


def _resultant_roots_2d(family: CatastropheFamily, slow: np.ndarray, report: CheckReport) -> List[np.ndarray]:
    coeffs_x, coeffs_gx, coeffs_gy = _resultant_system(family)
    scale = 1.0 + np.max(np.abs(slow))
    eliminant = np.array([float(c) for c in coeffs_x(*slow)])
    if np.all(np.abs(eliminant) < 1e-14 * scale):
        report.add("warning: résultant identiquement nul, fibre non isolée")
        return []
    found = []
    for r in np.roots(np.trim_zeros(eliminant, "f")):
        if abs(r.imag) > 1e-6 * max(1.0, abs(r)):
            continue
        xr = float(r.real)
        ys: List[float] = []
        for coeffs in (coeffs_gx, coeffs_gy):
            poly_y = np.trim_zeros(np.array([float(c) for c in coeffs(xr, *slow)]), "f")
            if poly_y.size > 1:
                ys.extend(float(v.real) for v in np.roots(poly_y) if abs(v.imag) <= 1e-6 * max(1.0, abs(v)))
        for yr in ys:
            candidate, residual = _polish(family, TotalPoint([xr, yr], slow), 1e-12 * scale)
            if residual <= 1e-9 * scale:
                found.append(candidate.fast)
    return _dedup(found, 1e-6)


def fibre_critical_points(
    family: CatastropheFamily, slow: np.ndarray, half_width: float = 3.0, report: Optional[CheckReport] = None
) -> List[np.ndarray]:
    """All critical points of V(., alpha) (inside the box for two fast variables)."""
    report = report if report is not None else CheckReport()
    slow = np.asarray(slow, dtype=float)
    if family.fast_dim == 1:
        return _fibre_roots_1d(family, slow, report)
    grid = _newton_grid_2d(family, slow, half_width)
    algebraic = [p for p in _resultant_roots_2d(family, slow, report) if np.max(np.abs(p)) <= half_width]
    for p in algebraic:
        if all(np.max(np.abs(p - other)) > 1e-6 for other in grid):
            report.add(f"warning: racine {p.tolist()} trouvée par élimination seulement")
    for p in grid:
        if algebraic and all(np.max(np.abs(p - other)) > 1e-6 for other in algebraic):
            report.add(f"warning: racine {p.tolist()} trouvée par la grille seulement")
    return _dedup(grid + algebraic, 1e-6)


def search_finite_jump(
    family: CatastropheFamily,
    q: TotalPoint,
    tol: float = 1e-8,
    settings: Optional[DescentSettings] = None,
    half_width: float = 3.0,
) -> JumpSearchReport:
    """Enumerate the fibre through ``q`` and keep the admissible landings."""
    settings = settings or DescentSettings()
    _require_singular(family, q, tol)
    report = CheckReport()
    roots = fibre_critical_points(family, q.slow, half_width, report)
    if not any(np.max(np.abs(r - q.fast)) <= 1e-6 for r in roots):
        report.add("warning: le point de requête n'a pas été retrouvé par l'énumération")
        roots.append(q.fast.copy())
    v_query = eval_potential(family, q)
    candidates: List[FibreCandidate] = []
    admissible: List[TotalPoint] = []
    for fast in roots:
        point = TotalPoint(fast, q.slow)
        membership = classify_membership(family, point, tol=tol)
        potential = eval_potential(family, point)
        if np.max(np.abs(fast - q.fast)) <= 1e-6:
            role = "query"
        elif membership.attracting is Attraction.OUTSIDE:
            role = "outside_min"
        elif potential >= v_query:
            role = "no_decrease"
        else:
            start = perturb_off_singular(family, q, toward=fast, magnitude=settings.perturbation)
            descent = fast_descent(family, start, settings)
            if descent.landed and np.max(np.abs(descent.landing.fast - fast)) <= 1e-6:
                role = "admissible"
                admissible.append(point)
            else:
                role = "descent_elsewhere"
        candidates.append(FibreCandidate(point, membership, role, potential))
    report.add(f"ok: {len(candidates)} points critiques, {len(admissible)} sauts admissibles")
    return JumpSearchReport(family, q, candidates, admissible, report)


# ---------------------------------------------------------------------------
# Sampling of singular points
# ---------------------------------------------------------------------------


def _swallowtail_b_point(x: float, a: float) -> TotalPoint:
    return TotalPoint([x], [a, -4 * x**3 - 2 * a * x, 3 * x**4 + a * x**2])


def sample_jump_queries(
    family: CatastropheFamily, count: int, rng: np.random.Generator, a_range: Tuple[float, float] = (-2.0, -0.1)
) -> List[TotalPoint]:
    """Random points of B from which a jump may start.

    Swallowtail: inside the finite-jump domain with 5 % margins. Cusp: fold
    points. Umbilics: B intersected with the closure of S_V,min, |a| <= 2.
    """
    tag = family.tag
    points: List[TotalPoint] = []
    while len(points) < count:
        if tag is FamilyTag.SWALLOWTAIL:
            a = float(rng.uniform(*a_range))
            low, high, cusp = swallowtail_jump_domain(a, family.sign)
            lo, hi = min(low, high), max(low, high)
            width = hi - lo
            x = float(rng.uniform(lo + 0.05 * width, hi - 0.05 * width))
            if abs(x - cusp) < 0.05 * width:
                continue
            points.append(_swallowtail_b_point(x, a))
        elif tag is FamilyTag.CUSP:
            a = float(rng.uniform(*a_range))
            x = float(rng.choice([-1.0, 1.0])) * np.sqrt(-a / 3.0)
            slow = [a, -x**3 - a * x] + ([float(rng.uniform(-1, 1))] if family.slow_dim == 3 else [])
            points.append(TotalPoint([x], slow))
        elif tag is FamilyTag.HYPERBOLIC_UMBILIC:
            a = float(rng.uniform(-2.0, 2.0))
            x = float(rng.uniform(0.05, 1.0))
            y = a**2 / (36.0 * x)
            if y > 3.0:
                continue
            points.append(TotalPoint([x, y], [a, -3 * x**2 - a * y, -3 * y**2 - a * x]))
        elif tag is FamilyTag.ELLIPTIC_UMBILIC:
            a = float(rng.uniform(0.05, 2.0))
            theta = float(rng.uniform(0.0, 2 * np.pi))
            x, y = a / 3.0 * np.cos(theta), a / 3.0 * np.sin(theta)
            points.append(
                TotalPoint([x, y], [a, -3 * x**2 + 3 * y**2 - 2 * a * x, 6 * x * y - 2 * a * y])
            )
        else:
            raise ValidationError(f"pas d'échantillonnage de sauts pour la famille {family.name}")
    return points
