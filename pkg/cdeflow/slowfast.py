"""
Slow-fast systems eps x' = -dV/dx, alpha' = g and their CDE limit.

Intègre la famille complète en epsilon (formes lente et rapide), fournit les
deux modèles de Zeeman (battement cardiaque, impulsion nerveuse) et mesure
la convergence vers la solution de la CDE quand epsilon tend vers 0.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from .base import CdeError, CheckReport, IntegrationError, ValidationError
from .config import get_config
from .desingularization import CdeSpec
from .integrator import EventKind, IntegrationSettings, Trajectory, integrate_cde
from .potentials import CatastropheFamily, ChartPoint, FamilyTag, TotalPoint, grad_fast, lift_to_constraint

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Built-in models
# ---------------------------------------------------------------------------


def zeeman_heartbeat(x0: Optional[float] = None) -> CdeSpec:
    """Cusp with a = -1 frozen and b' = x - x0.

    With x0 > 1/sqrt(3) the upper branch carries a stable rest state: one
    beat, then rest. With |x0| < 1/sqrt(3) the motion is a relaxation
    oscillation between the two stable branches.
    """
    x0 = get_config().heartbeat_x0 if x0 is None else float(x0)
    family = CatastropheFamily(FamilyTag.CUSP, slow_dim=2)
    return CdeSpec.from_expressions(family, [0, f"x - ({x0!r})"], name="zeeman_heartbeat")


def zeeman_nerve() -> CdeSpec:
    """Cusp with a' = -2(a + x), b' = -1 - a."""
    family = CatastropheFamily(FamilyTag.CUSP, slow_dim=2)
    return CdeSpec.from_expressions(family, ["-2*(a + x)", "-1 - a"], name="zeeman_nerve")


@dataclass(slots=True)
class BuiltinModel:
    name: str
    spec: CdeSpec
    start: ChartPoint
    horizon: float
    epsilons: Tuple[float, ...] = (1e-1, 1e-2, 1e-3)


def _heartbeat_model(x0: Optional[float] = None) -> BuiltinModel:
    spec = zeeman_heartbeat(x0)
    # Branche inférieure : le premier pli est atteint en temps fini
    start = ChartPoint.from_mapping(spec.family, {"x": -1.2, "a": -1.0})
    return BuiltinModel("zeeman_heartbeat", spec, start, horizon=get_config().horizon)


def _nerve_model() -> BuiltinModel:
    spec = zeeman_nerve()
    start = ChartPoint.from_mapping(spec.family, {"x": 1.1, "a": -1.2})
    return BuiltinModel("zeeman_nerve", spec, start, horizon=80.0)


BUILTIN_MODELS: Dict[str, Callable[..., BuiltinModel]] = {
    "zeeman_heartbeat": _heartbeat_model,
    "zeeman_nerve": _nerve_model,
}


def builtin_model(name: str, **kwargs: Any) -> BuiltinModel:
    try:
        factory = BUILTIN_MODELS[name]
    except KeyError as exc:
        raise ValidationError(f"modèle inconnu {name!r} (connus: {', '.join(BUILTIN_MODELS)})") from exc
    return factory(**kwargs)


# ---------------------------------------------------------------------------
# Full slow-fast integration
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SlowFastSpec:
    cde: CdeSpec
    epsilon: float

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon doit être > 0 (reçu {self.epsilon!r})")


@dataclass(slots=True)
class SlowFastSettings:
    """Solver choice; explicit schemes get their step capped at epsilon/5."""

    method: str = "Radau"
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = np.inf

    def __post_init__(self) -> None:
        if self.method not in ("Radau", "BDF", "LSODA", "RK45", "DOP853"):
            raise ValidationError(f"méthode d'intégration inconnue {self.method!r}")
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise ValidationError("SlowFastSettings: tolérances strictement positives attendues")

    @property
    def explicit(self) -> bool:
        return self.method in ("RK45", "DOP853")

    def step_cap(self, epsilon: float, timescale: str) -> float:
        if not self.explicit:
            return self.max_step
        # En temps rapide la couche limite est d'épaisseur O(1)
        cap = 0.2 if timescale == "fast" else epsilon / 5
        return min(self.max_step, cap)


@dataclass(slots=True)
class SlowFastTrajectory:
    family: CatastropheFamily
    epsilon: float
    timescale: str
    times: np.ndarray
    fast: np.ndarray
    slow: np.ndarray
    dense: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    solver_stats: Dict[str, int] = field(default_factory=dict)

    def slow_at(self, times: Sequence[float]) -> np.ndarray:
        """Slow coordinates at physical times."""
        times = np.asarray(times, dtype=float)
        scale = self.epsilon if self.timescale == "fast" else 1.0
        states = self.dense(times / scale)
        return np.asarray(states, dtype=float)[self.family.fast_dim :].T

    def slow_path(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.times, self.slow

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": self.times})
        for k, name in enumerate(self.family.fast_names):
            frame[name] = self.fast[:, k]
        for k, name in enumerate(self.family.slow_names):
            frame[name] = self.slow[:, k]
        frame["epsilon"] = self.epsilon
        return frame


def integrate_slowfast(
    sf: SlowFastSpec,
    start: TotalPoint,
    horizon: float,
    settings: Optional[SlowFastSettings] = None,
    timescale: str = "slow",
) -> SlowFastTrajectory:
    """Integrate the full system in slow time t or fast time tau = t / epsilon.

    Output times are physical (slow) times in both cases.
    """
    settings = settings or SlowFastSettings()
    if timescale not in ("slow", "fast"):
        raise ValidationError(f"échelle de temps inconnue {timescale!r} (slow ou fast)")
    if not horizon > 0:
        raise ValidationError("horizon doit être > 0")
    spec, eps = sf.cde, sf.epsilon
    family = spec.family
    n = family.fast_dim

    def slow_rhs(_t: float, z: np.ndarray) -> np.ndarray:
        point = TotalPoint(z[:n], z[n:])
        return np.concatenate([-grad_fast(family, point) / eps, spec.slow_field(point)])

    def fast_rhs(_t: float, z: np.ndarray) -> np.ndarray:
        point = TotalPoint(z[:n], z[n:])
        return np.concatenate([-grad_fast(family, point), eps * spec.slow_field(point)])

    rhs = slow_rhs if timescale == "slow" else fast_rhs
    span = horizon if timescale == "slow" else horizon / eps
    solution = solve_ivp(
        rhs,
        (0.0, span),
        start.vector,
        method=settings.method,
        rtol=settings.rel_tol,
        atol=settings.abs_tol,
        max_step=settings.step_cap(eps, timescale),
        dense_output=True,
    )
    if solution.status != 0:
        raise IntegrationError(
            f"échec de l'intégration lente-rapide (epsilon={eps:g}): {solution.message}",
            {"epsilon": eps, "t_reached": float(solution.t[-1]) if solution.t.size else 0.0},
        )
    times = solution.t * (eps if timescale == "fast" else 1.0)
    stats = {"nfev": int(solution.nfev), "njev": int(solution.njev), "nlu": int(solution.nlu)}
    logger.debug("epsilon=%g: %d pas, %s", eps, times.size, stats)
    return SlowFastTrajectory(
        family, eps, timescale, times, solution.y[:n].T, solution.y[n:].T, solution.sol, stats
    )


# ---------------------------------------------------------------------------
# Convergence towards the CDE
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class ErrorRow:
    epsilon: float
    sup_slow_error: float
    runtime_ms: float
    excluded_windows: List[Tuple[float, float]]
    status: str = "ok"


@dataclass(slots=True)
class ErrorTable:
    rows: List[ErrorRow]
    reference: Optional[Trajectory] = None
    report: CheckReport = field(default_factory=CheckReport)

    @property
    def errors(self) -> np.ndarray:
        return np.array([row.sup_slow_error for row in self.rows], dtype=float)

    def is_monotone(self) -> bool:
        """Errors strictly decrease along the (decreasing) epsilon grid."""
        errors = self.errors
        return bool(np.all(np.isfinite(errors)) and np.all(np.diff(errors) < 0))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "epsilon": [row.epsilon for row in self.rows],
                "sup_slow_error": [row.sup_slow_error for row in self.rows],
                "runtime_ms": [row.runtime_ms for row in self.rows],
                "excluded_windows": [
                    ";".join(f"{lo:.6g}:{hi:.6g}" for lo, hi in row.excluded_windows) for row in self.rows
                ],
                "status": [row.status for row in self.rows],
            }
        )


def layer_half_width(epsilon: float) -> float:
    return float(epsilon ** (1.0 / 3.0))


def convergence_study(
    cde: CdeSpec,
    start: ChartPoint,
    horizon: float,
    epsilons: Sequence[float],
    settings: Optional[SlowFastSettings] = None,
    cde_settings: Optional[IntegrationSettings] = None,
) -> ErrorTable:
    """Sup distance between slow coordinates of the epsilon-system and of the CDE solution.

    Windows of half-width epsilon^(1/3) around each jump or crossing of the
    CDE solution are left out of the comparison.
    """
    epsilons = [float(e) for e in epsilons]
    if not epsilons or any(e <= 0 for e in epsilons):
        raise ValidationError("epsilons: valeurs strictement positives attendues")
    if any(later >= earlier for earlier, later in zip(epsilons, epsilons[1:])):
        raise ValidationError("epsilons: suite strictement décroissante attendue")

    reference = integrate_cde(cde, start, cde_settings or IntegrationSettings.from_config(horizon=horizon))
    times, slow_ref = reference.slow_path()
    end = float(times[-1])
    layer_times = [
        e.time for e in reference.events if e.kind in (EventKind.JUMP, EventKind.SINGULAR_CROSSING)
    ]
    start_point = lift_to_constraint(cde.family, start)

    rows: List[ErrorRow] = []
    report = CheckReport()
    for eps in epsilons:
        width = layer_half_width(eps)
        windows = [(t - width, t + width) for t in layer_times]
        mask = np.ones(times.size, dtype=bool)
        for lo, hi in windows:
            mask &= (times < lo) | (times > hi)
        began = time.perf_counter()
        try:
            trajectory = integrate_slowfast(SlowFastSpec(cde, eps), start_point, end, settings)
            distance = np.abs(trajectory.slow_at(times[mask]) - slow_ref[mask])
            error = float(np.max(distance)) if distance.size else float("nan")
            status = "ok"
        except CdeError as exc:
            error, status = float("nan"), f"failed: {exc}"
            report.add(f"warning: epsilon={eps:g}: {exc}")
        runtime_ms = (time.perf_counter() - began) * 1e3
        rows.append(ErrorRow(eps, error, runtime_ms, windows, status))
        logger.info("epsilon=%g: erreur lente %.3e (%.0f ms)", eps, error, runtime_ms)

    table = ErrorTable(rows, reference, report)
    if table.is_monotone():
        report.add("ok: erreur strictement décroissante en epsilon")
    else:
        report.add("warning: erreur non monotone en epsilon")
    return table
