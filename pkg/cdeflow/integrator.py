"""
Event-driven integration of CDE solutions on S_V.

Intègre le champ désingularisé dans une carte, avec le temps physique comme
coordonnée supplémentaire (dt/ds = |det d pi~|), détecte les traversées de B,
les sorties de domaine, l'horizon et les équilibres, et délègue les sauts au
module jumps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import RK45
from scipy.optimize import brentq

from .base import CheckReport, EventLocalizationError, IntegrationError, PreconditionError, ValidationError
from .config import get_config
from .desingularization import (
    CdeSpec,
    desingularized_field_generic,
    jacobian_projection,
    projection_determinant,
)
from .jumps import DescentSettings, resolve_jump
from .potentials import (
    Attraction,
    CatastropheFamily,
    ChartPoint,
    TotalPoint,
    chart_of,
    classify_membership,
    lift_to_constraint,
)

logger = logging.getLogger(__name__)


class EventKind(str, Enum):
    SINGULAR_CROSSING = "singular_crossing"
    JUMP = "jump"
    EQUILIBRIUM = "equilibrium"
    DOMAIN_EXIT = "domain_exit"
    HORIZON_REACHED = "horizon_reached"


@dataclass(slots=True)
class Event:
    kind: EventKind
    time: float
    at: TotalPoint
    to: Optional[TotalPoint] = None
    chart_time: float = float("nan")
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self, family: CatastropheFamily) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "time": float(self.time),
            "chart_time": float(self.chart_time),
            "at": self.at.as_dict(family),
            "to": None if self.to is None else self.to.as_dict(family),
            "details": self.details,
        }


@dataclass(slots=True)
class Segment:
    """Samples between two events; sign(det) is constant inside."""

    times: np.ndarray
    chart_times: np.ndarray
    chart_points: np.ndarray
    lifted: np.ndarray
    det_proj: np.ndarray
    orientation: int


@dataclass(slots=True)
class Trajectory:
    family: CatastropheFamily
    segments: List[Segment]
    events: List[Event]
    report: CheckReport = field(default_factory=CheckReport)

    @property
    def final_event(self) -> Optional[Event]:
        return self.events[-1] if self.events else None

    @property
    def final_point(self) -> TotalPoint:
        last = self.segments[-1].lifted[-1]
        n = self.family.fast_dim
        return TotalPoint(last[:n], last[n:])

    def slow_path(self) -> Tuple[np.ndarray, np.ndarray]:
        """Physical times and slow coordinates of every sample, in order."""
        n = self.family.fast_dim
        times = np.concatenate([s.times for s in self.segments])
        slow = np.vstack([s.lifted[:, n:] for s in self.segments])
        return times, slow

    def to_frame(self) -> pd.DataFrame:
        """Trajectory table: t, chart coordinates, lifted coordinates, det_proj, event_flag."""
        chart_names = list(self.family.chart_names)
        lifted_names = [f"lifted_{n}" for n in self.family.variable_names]
        frames = []
        for index, segment in enumerate(self.segments):
            frame = pd.DataFrame(segment.chart_points, columns=chart_names)
            frame.insert(0, "t", segment.times)
            frame[lifted_names] = segment.lifted
            frame["det_proj"] = segment.det_proj
            frame["segment"] = index
            flags = [""] * len(frame)
            if index < len(self.events):
                flags[-1] = self.events[index].kind.value
            frame["event_flag"] = flags
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)

    def event_log(self) -> List[Dict[str, Any]]:
        return [event.to_dict(self.family) for event in self.events]


@dataclass(slots=True)
class IntegrationSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.05
    horizon: float = 10.0
    domain_box: Optional[np.ndarray] = None
    event_tol: float = 1e-12
    det_tol: float = 1e-10
    equilibrium_tol: float = 1e-12
    equilibrium_steps: int = 3
    chart_time_limit: float = 1e4
    max_steps: int = 500_000
    max_jumps: int = 100

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "max_step", "horizon", "event_tol", "det_tol",
                     "equilibrium_tol", "chart_time_limit"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"IntegrationSettings.{name} doit être > 0")
        if self.equilibrium_steps < 1 or self.max_steps < 1 or self.max_jumps < 0:
            raise ValidationError("IntegrationSettings: compteurs invalides")
        if self.domain_box is not None:
            box = np.asarray(self.domain_box, dtype=float)
            if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 0] >= box[:, 1]):
                raise ValidationError("domain_box: tableau (m, 2) de bornes [min, max] attendu")
            self.domain_box = box

    @classmethod
    def from_config(cls, horizon: Optional[float] = None, **kwargs: Any) -> "IntegrationSettings":
        cfg = get_config()
        return cls(
            rel_tol=cfg.rel_tol,
            abs_tol=cfg.abs_tol,
            horizon=cfg.horizon if horizon is None else horizon,
            event_tol=cfg.event_tol,
            det_tol=cfg.det_tol,
            equilibrium_tol=cfg.equilibrium_tol,
            domain_box=kwargs.pop("domain_box", None),
            **kwargs,
        )

    def box_for(self, m: int) -> np.ndarray:
        if self.domain_box is not None:
            if self.domain_box.shape[0] != m:
                raise ValidationError(f"domain_box: {m} lignes attendues")
            return self.domain_box
        half = get_config().domain_half_width
        return np.tile([-half, half], (m, 1)).astype(float)


@dataclass(slots=True)
class StepBracket:
    """Two accepted states in chart time with a continuous interpolant between them."""

    s0: float
    s1: float
    y0: np.ndarray
    y1: np.ndarray
    dense: Callable[[float], np.ndarray]

    @classmethod
    def linear(cls, s0: float, y0: Sequence[float], s1: float, y1: Sequence[float]) -> "StepBracket":
        y0, y1 = np.asarray(y0, dtype=float), np.asarray(y1, dtype=float)
        return cls(s0, s1, y0, y1, lambda s: y0 + (s - s0) / (s1 - s0) * (y1 - y0))


def orientation_factor(family: CatastropheFamily, chart: ChartPoint) -> int:
    return int(np.sign(projection_determinant(family, chart)))


def _indicator(spec: CdeSpec, kind: EventKind, settings: IntegrationSettings) -> Callable[[np.ndarray], float]:
    family = spec.family
    m = family.slow_dim
    if kind is EventKind.SINGULAR_CROSSING:
        return lambda y: projection_determinant(family, ChartPoint(family, y[:m]))
    if kind is EventKind.DOMAIN_EXIT:
        box = settings.box_for(m)
        return lambda y: float(np.max(np.maximum(box[:, 0] - y[:m], y[:m] - box[:, 1])))
    if kind is EventKind.HORIZON_REACHED:
        return lambda y: float(y[m] - settings.horizon)
    raise EventLocalizationError(f"pas d'indicateur localisable pour {kind.value}")


def locate_event(
    spec: CdeSpec, bracket: StepBracket, kind: EventKind, settings: Optional[IntegrationSettings] = None
) -> Event:
    """Refine the zero of the event indicator inside ``bracket`` (Brent's method)."""
    settings = settings or IntegrationSettings()
    family = spec.family
    m = family.slow_dim
    indicator = _indicator(spec, kind, settings)
    h0, h1 = indicator(bracket.dense(bracket.s0)), indicator(bracket.dense(bracket.s1))
    if h0 == 0.0:
        s_star = bracket.s0
    elif h1 == 0.0:
        s_star = bracket.s1
    elif np.sign(h0) == np.sign(h1):
        raise EventLocalizationError(
            f"{kind.value}: pas de changement de signe sur [{bracket.s0:.6g}, {bracket.s1:.6g}] "
            f"(indicateur {h0:.3e} -> {h1:.3e})"
        )
    else:
        s_star = brentq(
            lambda s: indicator(bracket.dense(s)),
            bracket.s0,
            bracket.s1,
            xtol=settings.event_tol,
            rtol=4 * np.finfo(float).eps,
            maxiter=500,
        )
    y = np.asarray(bracket.dense(s_star), dtype=float)
    point = lift_to_constraint(family, ChartPoint(family, y[:m]))
    time = float(y[m]) if y.size > m else float(s_star)
    details: Dict[str, Any] = {"indicator": float(indicator(y))}
    logger.debug("événement %s localisé en s=%.12g (t=%.12g)", kind.value, s_star, time)
    return Event(kind, time, point, chart_time=float(s_star), details=details)


def _augmented_rhs(spec: CdeSpec, orientation: int) -> Callable[[float, np.ndarray], np.ndarray]:
    family = spec.family
    m = family.slow_dim

    def rhs(_s: float, y: np.ndarray) -> np.ndarray:
        chart = ChartPoint(family, y[:m])
        jac = jacobian_projection(family, chart)
        field_ = desingularized_field_generic(spec, chart)
        return np.append(orientation * field_, abs(np.linalg.det(jac)))

    return rhs


def _interior_flip(
    family: CatastropheFamily, bracket: StepBracket, orientation: int, samples: int = 3
) -> Optional[StepBracket]:
    """Sub-bracket ending at the first interior dense-output sample where det changes sign."""
    m = family.slow_dim
    for s in np.linspace(bracket.s0, bracket.s1, samples + 2)[1:-1]:
        y = np.asarray(bracket.dense(s), dtype=float)
        if np.sign(projection_determinant(family, ChartPoint(family, y[:m]))) != orientation:
            return StepBracket(bracket.s0, float(s), bracket.y0, y, bracket.dense)
    return None


def _integrate_segment(
    spec: CdeSpec, chart: np.ndarray, t_start: float, s_start: float, settings: IntegrationSettings
) -> Tuple[Segment, Event]:
    family = spec.family
    m = family.slow_dim
    orientation = orientation_factor(family, ChartPoint(family, chart))
    box = settings.box_for(m)
    rhs = _augmented_rhs(spec, orientation)
    solver = RK45(
        rhs,
        s_start,
        np.append(chart, t_start),
        t_bound=s_start + settings.chart_time_limit,
        rtol=settings.rel_tol,
        atol=settings.abs_tol,
        max_step=settings.max_step,
    )
    chart_times: List[float] = [s_start]
    states: List[np.ndarray] = [np.append(chart, t_start)]
    quiet_steps = 0
    event: Optional[Event] = None

    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed":
            raise IntegrationError(
                f"échec du pas d'intégration: {message}",
                {"chart_time": solver.t, "state": solver.y.tolist(), "step": solver.step_size},
            )
        bracket = StepBracket(chart_times[-1], solver.t, states[-1], solver.y.copy(), solver.dense_output())
        y_new = solver.y
        pending: List[EventKind] = []
        crossing_bracket = bracket
        det_new = projection_determinant(family, ChartPoint(family, y_new[:m]))
        if np.sign(det_new) != orientation:
            pending.append(EventKind.SINGULAR_CROSSING)
        else:
            # det may leave and re-enter its sign within one step
            inner = _interior_flip(family, bracket, orientation)
            if inner is not None:
                crossing_bracket = inner
                pending.append(EventKind.SINGULAR_CROSSING)
        if np.any(y_new[:m] < box[:, 0]) or np.any(y_new[:m] > box[:, 1]):
            pending.append(EventKind.DOMAIN_EXIT)
        if y_new[m] >= settings.horizon:
            pending.append(EventKind.HORIZON_REACHED)
        if pending:
            located = [
                locate_event(spec, crossing_bracket if kind is EventKind.SINGULAR_CROSSING else bracket, kind, settings)
                for kind in pending
            ]
            event = min(located, key=lambda e: e.chart_time)
            chart_times.append(event.chart_time)
            states.append(np.asarray(bracket.dense(event.chart_time), dtype=float))
            break
        chart_times.append(solver.t)
        states.append(y_new.copy())
        if np.linalg.norm(desingularized_field_generic(spec, ChartPoint(family, y_new[:m]))) < settings.equilibrium_tol:
            quiet_steps += 1
        else:
            quiet_steps = 0
        if quiet_steps >= settings.equilibrium_steps:
            point = lift_to_constraint(family, ChartPoint(family, y_new[:m]))
            event = Event(EventKind.EQUILIBRIUM, float(y_new[m]), point, chart_time=solver.t)
            break
        if len(states) > settings.max_steps:
            raise IntegrationError(
                "budget de pas épuisé", {"chart_time": solver.t, "steps": len(states), "state": y_new.tolist()}
            )

    if event is None:
        y_end = states[-1]
        point = lift_to_constraint(family, ChartPoint(family, y_end[:m]))
        event = Event(
            EventKind.HORIZON_REACHED,
            float(y_end[m]),
            point,
            chart_time=chart_times[-1],
            details={"reason": "chart_time_limit"},
        )

    data = np.vstack(states)
    lifted = np.vstack([lift_to_constraint(family, ChartPoint(family, y[:m])).vector for y in data])
    dets = np.array([projection_determinant(family, ChartPoint(family, y[:m])) for y in data])
    segment = Segment(data[:, m], np.asarray(chart_times), data[:, :m], lifted, dets, orientation)
    return segment, event


def integrate_cde(
    spec: CdeSpec,
    start: ChartPoint,
    settings: Optional[IntegrationSettings] = None,
    descent: Optional[DescentSettings] = None,
) -> Trajectory:
    """Solution of the CDE from ``start``, continued through finite jumps."""
    settings = settings or IntegrationSettings.from_config()
    family = spec.family
    if not family.supports_dynamics:
        raise ValidationError(f"{family.name}: pas de dynamique lente intégrable")
    membership = classify_membership(family, lift_to_constraint(family, start))
    if membership.attracting is not Attraction.INTERIOR:
        raise PreconditionError(
            f"départ hors de l'intérieur de S_V,min ({membership.attracting.value}, "
            f"spectre {membership.hessian_eigenvalues})"
        )

    report = CheckReport()
    segments: List[Segment] = []
    events: List[Event] = []
    chart, t_now, s_now = start.coords.copy(), 0.0, 0.0
    jumps_done = 0
    while True:
        segment, event = _integrate_segment(spec, chart, t_now, s_now, settings)
        segments.append(segment)
        if event.kind is not EventKind.SINGULAR_CROSSING:
            events.append(event)
            break
        if jumps_done >= settings.max_jumps:
            report.add(f"warning: limite de {settings.max_jumps} sauts atteinte")
            events.append(event)
            break
        landing = resolve_jump(family, event.at, descent)
        if not landing.landed:
            event.details["jump"] = landing.to_dict()
            report.add(f"warning: pas de saut fini depuis {event.at!r} ({landing.outcome.value})")
            events.append(event)
            break
        target = chart_of(family, landing.landing)
        if orientation_factor(family, target) == 0:
            event.details["jump"] = landing.to_dict()
            report.add("warning: atterrissage sur B, intégration arrêtée")
            events.append(event)
            break
        jump = Event(
            EventKind.JUMP,
            event.time,
            event.at,
            to=landing.landing,
            chart_time=event.chart_time,
            details={"potential_drop": landing.potential_drop},
        )
        events.append(jump)
        logger.info("saut en t=%.6g: %s -> %s", jump.time, event.at.fast, landing.landing.fast)
        jumps_done += 1
        chart, t_now, s_now = target.coords.copy(), event.time, event.chart_time

    report.add(f"ok: {len(segments)} segments, {jumps_done} sauts, fin {events[-1].kind.value}")
    return Trajectory(family, segments, events, report)
